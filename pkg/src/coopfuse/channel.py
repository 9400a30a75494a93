"""Feature-domain wireless channel: link budget, fading, and AWGN injection.

A transmitted feature map is scaled by the relative large-scale attenuation
(path loss normalized to a reference distance, so magnitudes are never
absolutely rescaled) and a per-frame fading magnitude, then element-wise
Gaussian noise is added with variance chosen to hit the link-budget SNR:

    s   = g_rel * |h| * f
    P_s = mean(s^2)               (empirical, over all elements)
    sigma^2 = P_s / 10^(SNR/10)
    out = s + n,   n ~ N(0, sigma^2)

Path loss is free-space for infrastructure links and a log-distance model
with configurable exponent/intercept/shadowing for vehicle-to-vehicle
links.  Fading is Rician (with line-of-sight factor K) or Rayleigh, both
normalized to unit mean power.  Delays, packet loss, and Doppler are out
of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .cache import FeatureMap
from .rng import RngStream
from .tensor import DomainError, Tensor

SPEED_OF_LIGHT = 299_792_458.0
MIN_DISTANCE_M = 1.0  # floor avoids the log singularity at d -> 0
RICIAN_K_CAP = 1e12

# Defaults for the log-distance V2V model (urban line-of-sight street
# parameterization: exponent 2.27, intercept FSPL(10 m) + 1.84 dB).
V2V_EXPONENT = 2.27
V2V_INTERCEPT_OFFSET_DB = 1.84
V2V_DREF_M = 10.0
V2V_SHADOW_SIGMA_DB = 3.0


@dataclass(frozen=True)
class LinkBudget:
    """Static radio parameters of one link."""

    fc_hz: float = 5.9e9
    bandwidth_hz: float = 10e6
    ptx_dbm: float = 23.0
    gtx_dbi: float = 3.0
    grx_dbi: float = 3.0
    nf_db: float = 6.0
    n0_dbm_hz: float = -174.0

    def __post_init__(self) -> None:
        if self.fc_hz <= 0:
            raise DomainError(f"carrier frequency must be positive, got {self.fc_hz}")
        if self.bandwidth_hz <= 0:
            raise DomainError(f"bandwidth must be positive, got {self.bandwidth_hz}")

    def with_gtx(self, gtx_dbi: float) -> "LinkBudget":
        return replace(self, gtx_dbi=gtx_dbi)


@dataclass(frozen=True)
class PathLossModel:
    """Large-scale path loss: free-space or log-distance with shadowing."""

    variant: str = "fspl"  # "fspl" | "winner2"
    exponent: float = V2V_EXPONENT
    intercept_db: float | None = None  # None: FSPL(d_ref) + offset, per carrier
    d_ref_m: float = V2V_DREF_M
    shadow_sigma_db: float = V2V_SHADOW_SIGMA_DB

    def __post_init__(self) -> None:
        if self.variant not in ("fspl", "winner2"):
            raise ValueError(f"unknown path loss variant {self.variant!r}")
        if self.exponent <= 0:
            raise DomainError(f"path loss exponent must be positive, got {self.exponent}")
        if self.shadow_sigma_db < 0:
            raise DomainError(f"shadowing sigma must be >= 0, got {self.shadow_sigma_db}")
        if self.d_ref_m <= 0:
            raise DomainError(f"reference distance must be positive, got {self.d_ref_m}")

    @classmethod
    def fspl(cls) -> "PathLossModel":
        return cls(variant="fspl")

    @classmethod
    def winner2(
        cls,
        exponent: float = V2V_EXPONENT,
        intercept_db: float | None = None,
        d_ref_m: float = V2V_DREF_M,
        shadow_sigma_db: float = V2V_SHADOW_SIGMA_DB,
    ) -> "PathLossModel":
        return cls("winner2", exponent, intercept_db, d_ref_m, shadow_sigma_db)


@dataclass(frozen=True)
class FadingModel:
    """Small-scale fading magnitude, unit mean power by construction."""

    variant: str = "rician"  # "rician" | "rayleigh"
    k_factor: float = 0.0  # linear Rician K; ignored for Rayleigh

    def __post_init__(self) -> None:
        if self.variant not in ("rician", "rayleigh"):
            raise ValueError(f"unknown fading variant {self.variant!r}")
        if not math.isfinite(self.k_factor) or self.k_factor < 0:
            raise DomainError(f"Rician K must be finite and >= 0, got {self.k_factor}")

    @classmethod
    def rayleigh(cls) -> "FadingModel":
        return cls(variant="rayleigh")

    @classmethod
    def rician(cls, k_factor: float) -> "FadingModel":
        return cls(variant="rician", k_factor=k_factor)

    @classmethod
    def rician_db(cls, k_db: float) -> "FadingModel":
        return cls(variant="rician", k_factor=10.0 ** (k_db / 10.0))


@dataclass(frozen=True)
class ChannelDraw:
    """All intermediates of one link realization."""

    d_m: float
    pl_db: float
    snr_db: float
    h_mag: float
    g_rel: float
    sigma2: float
    p_s: float


# -- link budget arithmetic ----------------------------------------------------


def fspl_db(d_m: float, fc_hz: float) -> float:
    """Free-space path loss 20 log10(4 pi d f / c) in dB."""
    if d_m <= 0:
        raise DomainError(f"distance must be positive, got {d_m}")
    d = max(d_m, MIN_DISTANCE_M)
    return (
        20.0 * math.log10(d)
        + 20.0 * math.log10(fc_hz)
        + 20.0 * math.log10(4.0 * math.pi / SPEED_OF_LIGHT)
    )


def path_loss_db(
    model: PathLossModel,
    d_m: float,
    fc_hz: float,
    rng: RngStream | None = None,
) -> float:
    """Path loss in dB; adds a log-normal shadowing draw for the log-distance
    model when sigma > 0 and an RNG is supplied."""
    if d_m <= 0:
        raise DomainError(f"distance must be positive, got {d_m}")
    if model.variant == "fspl":
        return fspl_db(d_m, fc_hz)
    d = max(d_m, MIN_DISTANCE_M)
    intercept = model.intercept_db
    if intercept is None:
        intercept = fspl_db(model.d_ref_m, fc_hz) + V2V_INTERCEPT_OFFSET_DB
    pl = intercept + 10.0 * model.exponent * math.log10(d / model.d_ref_m)
    if rng is not None and model.shadow_sigma_db > 0:
        pl += model.shadow_sigma_db * float(rng.normal(1)[0])
    return pl


def noise_power_dbm(lb: LinkBudget) -> float:
    """Receiver noise power over the link bandwidth, in dBm."""
    return lb.n0_dbm_hz + 10.0 * math.log10(lb.bandwidth_hz) + lb.nf_db


def snr_db(lb: LinkBudget, pl_db: float) -> float:
    """Received SNR from the link budget, in dB."""
    p_rx = lb.ptx_dbm + lb.gtx_dbi + lb.grx_dbi - pl_db
    return p_rx - noise_power_dbm(lb)


def _pl_slope_db(model: PathLossModel, d_m: float) -> float:
    # Distance-dependent part only; intercepts cancel in g_rel.
    d = max(d_m, MIN_DISTANCE_M)
    if model.variant == "fspl":
        return 20.0 * math.log10(d)
    return 10.0 * model.exponent * math.log10(d)


def g_rel(model: PathLossModel, d_m: float, d0_m: float) -> float:
    """Relative large-scale attenuation 10^(-(PL(d) - PL(d0))/20), in (0, 1]
    for d >= d0.  Deterministic (no shadowing)."""
    if d_m <= 0 or d0_m <= 0:
        raise DomainError(f"distances must be positive, got d={d_m}, d0={d0_m}")
    return 10.0 ** (-(_pl_slope_db(model, d_m) - _pl_slope_db(model, d0_m)) / 20.0)


# -- fading --------------------------------------------------------------------


def sample_fading(model: FadingModel, rng: RngStream, n: int | None = None):
    """Fading magnitude |h|; one scalar by default, an array of ``n`` draws
    when requested (for moment checks)."""
    count = 1 if n is None else n
    z = rng.normal(2 * count)
    x, y = z[:count], z[count:]
    if model.variant == "rayleigh":
        mag = np.sqrt((x * x + y * y) / 2.0)
    else:
        k = min(model.k_factor, RICIAN_K_CAP)
        nu = math.sqrt(k / (k + 1.0))
        s = math.sqrt(1.0 / (2.0 * (k + 1.0)))
        mag = np.sqrt((nu + s * x) ** 2 + (s * y) ** 2)
    if n is None:
        return float(mag[0])
    return mag


# -- feature corruption ----------------------------------------------------------


def _inject(
    f: Tensor,
    g: float,
    h_mag: float,
    target_snr_db: float,
    rng: RngStream,
) -> tuple[Tensor, float, float]:
    s = g * h_mag * f.array
    p_s = float(np.mean(s * s))
    sigma2 = p_s / 10.0 ** (target_snr_db / 10.0)
    if sigma2 > 0:
        out = s + math.sqrt(sigma2) * rng.normal(f.shape)
    else:
        out = s.copy()  # all-zero feature: P_s = 0 gives a noise-free pass-through
    return Tensor._wrap(np.ascontiguousarray(out)), p_s, sigma2


def corrupt_feature(
    f: FeatureMap,
    path_loss: PathLossModel,
    fading: FadingModel,
    lb: LinkBudget,
    d_m: float,
    d0_m: float,
    rng: RngStream,
) -> tuple[FeatureMap, ChannelDraw]:
    """Pass one feature map through the full link-budget channel.

    Draw order on the stream is fixed (shadowing, fading, noise) so equal
    seeds give bit-identical outputs.
    """
    pl = path_loss_db(path_loss, d_m, lb.fc_hz, rng)
    target = snr_db(lb, pl)
    g = g_rel(path_loss, d_m, d0_m)
    h_mag = sample_fading(fading, rng)
    out, p_s, sigma2 = _inject(f.data, g, h_mag, target, rng)
    draw = ChannelDraw(
        d_m=d_m, pl_db=pl, snr_db=target, h_mag=h_mag, g_rel=g, sigma2=sigma2, p_s=p_s
    )
    return FeatureMap(f.agent_id, f.timestep, out), draw


def corrupt_at_fixed_snr(
    f: FeatureMap,
    snr_db_target: float,
    fading: FadingModel,
    rng: RngStream,
) -> tuple[FeatureMap, ChannelDraw]:
    """Corrupt at a pinned SNR, bypassing the link budget (g_rel = 1)."""
    if not math.isfinite(snr_db_target):
        raise DomainError(f"target SNR must be finite, got {snr_db_target}")
    h_mag = sample_fading(fading, rng)
    out, p_s, sigma2 = _inject(f.data, 1.0, h_mag, snr_db_target, rng)
    draw = ChannelDraw(
        d_m=0.0, pl_db=0.0, snr_db=snr_db_target, h_mag=h_mag, g_rel=1.0,
        sigma2=sigma2, p_s=p_s,
    )
    return FeatureMap(f.agent_id, f.timestep, out), draw
