"""Terahertz link-budget kernel.

Pure functions for path loss, antenna gain, achievable rate, and the
closed-form illumination radius of a single access point. All quantities
are linear (W, W/Hz, dimensionless gains); dB conversions belong to the
config boundary. Distance arguments accept scalars or numpy arrays.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

SPEED_OF_LIGHT = 299792458.0

# gain of a uniformly illuminated circular aperture with a conical main
# lobe, as a function of full beamwidth in degrees
GAIN_NUMERATOR = 52525.0

_DEFAULT_TABLE_RESOURCE = "absorption_water_vapor.csv"


class AbsorptionTable:
    """Frequency-indexed medium absorption coefficients.

    The table stores tau (1/m) sampled at a reference relative humidity;
    lookups interpolate linearly in frequency and scale linearly in
    humidity. Temperature is carried through the parameter set but the
    bundled table was generated at a fixed 25 C and ignores it.
    """

    def __init__(self, frequency_hz, tau_per_m, reference_humidity: float):
        self.frequency_hz = np.asarray(frequency_hz, dtype=float)
        self.tau_per_m = np.asarray(tau_per_m, dtype=float)
        self.reference_humidity = float(reference_humidity)
        if self.frequency_hz.ndim != 1 or self.frequency_hz.size < 2:
            raise ValueError("absorption table needs at least two rows")
        if np.any(np.diff(self.frequency_hz) <= 0):
            raise ValueError("absorption table frequencies must be increasing")
        if not 0 < self.reference_humidity <= 1:
            raise ValueError("reference_humidity must be in (0, 1]")

    @classmethod
    def from_file(cls, path) -> "AbsorptionTable":
        freqs, taus, refs = [], [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                freqs.append(float(row["frequency_hz"]))
                taus.append(float(row["tau_per_m"]))
                refs.append(float(row["reference_humidity"]))
        if len(set(refs)) != 1:
            raise ValueError(f"{path}: mixed reference humidities")
        return cls(freqs, taus, refs[0])

    @classmethod
    def default(cls) -> "AbsorptionTable":
        return _default_table()

    def tau(self, f_c_hz: float, humidity: float) -> float:
        """Absorption coefficient (1/m) at a carrier frequency and RH."""
        if not self.frequency_hz[0] <= f_c_hz <= self.frequency_hz[-1]:
            raise ValueError(
                f"f_c={f_c_hz:g} Hz outside table range "
                f"[{self.frequency_hz[0]:g}, {self.frequency_hz[-1]:g}] "
                "and no tau_override set"
            )
        base = float(np.interp(f_c_hz, self.frequency_hz, self.tau_per_m))
        return base * (humidity / self.reference_humidity)


@lru_cache(maxsize=1)
def _default_table() -> AbsorptionTable:
    ref = resources.files("thzplan.data").joinpath(_DEFAULT_TABLE_RESOURCE)
    with resources.as_file(ref) as path:
        return AbsorptionTable.from_file(path)


@dataclass(frozen=True)
class LinkBudgetParams:
    """Radio and channel parameters of one access-point class.

    p_t_w is the per-AP transmit power; when APs split a room budget the
    caller divides before building the params.
    """

    f_c_hz: float = 570e9
    bandwidth_hz: float = 10e9
    p_t_w: float = 1e-3
    tx_beamwidth_deg: float = 10.0
    rx_beamwidth_deg: float = 10.0
    noise_psd_w_hz: float = 10 ** (-193.85 / 10)
    humidity: float = 0.60
    temperature_c: float = 25.0
    tau_override: float | None = None

    def __post_init__(self):
        for name in ("f_c_hz", "bandwidth_hz", "p_t_w", "noise_psd_w_hz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("tx_beamwidth_deg", "rx_beamwidth_deg"):
            bw = getattr(self, name)
            if not 0 < bw <= 360:
                raise ValueError(f"{name} must be in (0, 360]")
        if not 0 <= self.humidity <= 1:
            raise ValueError("humidity must be a fraction in [0, 1]")
        if self.tau_override is not None and self.tau_override < 0:
            raise ValueError("tau_override must be >= 0")


def antenna_gain(beamwidth_deg: float) -> float:
    """Linear gain of the conical main lobe for a full beamwidth in degrees."""
    if not 0 < beamwidth_deg <= 360:
        raise ValueError(f"beamwidth {beamwidth_deg} deg outside (0, 360]")
    return GAIN_NUMERATOR / (beamwidth_deg * beamwidth_deg)


def absorption_coefficient(
    f_c_hz: float,
    humidity: float,
    temperature_c: float = 25.0,
    tau_override: float | None = None,
    table: AbsorptionTable | None = None,
) -> float:
    """Medium absorption coefficient (1/m).

    An explicit tau_override bypasses the table entirely. Otherwise the
    bundled (or supplied) table is interpolated at f_c and scaled to the
    requested humidity. temperature_c is accepted for interface
    completeness; the default table has no temperature dependence.
    """
    if tau_override is not None:
        if tau_override < 0:
            raise ValueError("tau_override must be >= 0")
        return float(tau_override)
    if table is None:
        table = _default_table()
    return table.tau(f_c_hz, humidity)


def absorption_for(params: LinkBudgetParams, table: AbsorptionTable | None = None) -> float:
    return absorption_coefficient(
        params.f_c_hz, params.humidity, params.temperature_c,
        params.tau_override, table,
    )


def _check_distance(d):
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    return d


def total_path_loss(d_m, params: LinkBudgetParams, table: AbsorptionTable | None = None):
    """Spreading loss times exponential medium absorption (linear, >= 1
    for any distance beyond a few wavelengths). Strictly increasing in d."""
    d = _check_distance(d_m)
    tau = absorption_for(params, table)
    spreading = (4.0 * math.pi * params.f_c_hz / SPEED_OF_LIGHT) ** 2 * d * d
    loss = spreading * np.exp(tau * d)
    return float(loss) if loss.ndim == 0 else loss


def achievable_rate(d_m, params: LinkBudgetParams, table: AbsorptionTable | None = None):
    """Shannon rate (bit/s) over the noise-limited link at distance d."""
    d = _check_distance(d_m)
    g_t = antenna_gain(params.tx_beamwidth_deg)
    g_r = antenna_gain(params.rx_beamwidth_deg)
    loss = total_path_loss(d, params, table)
    snr = params.p_t_w * g_t * g_r / (loss * params.noise_psd_w_hz * params.bandwidth_hz)
    rate = params.bandwidth_hz * np.log2(1.0 + snr)
    return float(rate) if np.ndim(rate) == 0 else rate


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function.

    Halley iteration from a branch-aware initial guess; residual
    |w e^w - x| <= 1e-12 * max(1, |x|). Defined for x >= -1/e.
    """
    x = float(x)
    inv_e = math.exp(-1.0)
    if x < -inv_e:
        raise ValueError(f"lambert_w0 undefined for x={x} < -1/e")
    if x == 0.0:
        return 0.0

    # initial guess
    if x < -inv_e + 0.25:
        # series around the branch point
        p = math.sqrt(2.0 * (math.e * x + 1.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 * p ** 3 / 72.0
    elif x < math.e:
        w = x / (1.0 + x) if x > 0 else x * (1.0 - x)
    else:
        lx = math.log(x)
        w = lx - math.log(lx)

    tol = 1e-12 * max(1.0, abs(x))
    for _ in range(50):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= tol:
            break
        wp1 = w + 1.0
        # Halley step
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        w -= f / denom
        if w <= -1.0:
            w = -1.0 + 1e-15
    return w


def _radius_constant(params: LinkBudgetParams, spectral_efficiency: float) -> float:
    if spectral_efficiency <= 0:
        raise ValueError("spectral efficiency must be positive")
    g_t = antenna_gain(params.tx_beamwidth_deg)
    g_r = antenna_gain(params.rx_beamwidth_deg)
    k = params.p_t_w * g_t * g_r / (
        params.noise_psd_w_hz
        * params.bandwidth_hz
        * (4.0 * math.pi * params.f_c_hz / SPEED_OF_LIGHT) ** 2
        * (2.0 ** spectral_efficiency - 1.0)
    )
    if k <= 0:
        raise ValueError("radius constant must be positive")
    return k


def coverage_radius(
    params: LinkBudgetParams,
    spectral_efficiency: float,
    table: AbsorptionTable | None = None,
) -> float:
    """Distance (m) at which the link sustains the given spectral
    efficiency: the unique positive root of r^2 e^(tau r) = K.

    Solved in closed form through the Lambert W principal branch,
    r = 2 W(tau sqrt(K) / 2) / tau, degenerating to sqrt(K) for tau = 0.
    No ceiling is applied; see coverage_radius_ceiled.
    """
    k = _radius_constant(params, spectral_efficiency)
    tau = absorption_for(params, table)
    if tau == 0.0:
        return math.sqrt(k)
    return 2.0 * lambert_w0(tau * math.sqrt(k) / 2.0) / tau


def coverage_radius_ceiled(
    params: LinkBudgetParams,
    spectral_efficiency: float,
    table: AbsorptionTable | None = None,
) -> int:
    """coverage_radius rounded up to a whole meter."""
    return math.ceil(coverage_radius(params, spectral_efficiency, table))


def coverage_radius_bruteforce(
    params: LinkBudgetParams,
    spectral_efficiency: float,
    table: AbsorptionTable | None = None,
) -> float:
    """Bisection oracle for coverage_radius.

    Works on log(r^2 e^(tau r) / K) = 2 ln r + tau r - ln K, which is
    strictly increasing and overflow-free. The bracket doubles upward from
    1 m until the sign flips, then bisects to an interval below 1e-9 m (or
    to float resolution for very large radii).
    """
    k = _radius_constant(params, spectral_efficiency)
    tau = absorption_for(params, table)
    log_k = math.log(k)

    def g(r):
        return 2.0 * math.log(r) + tau * r - log_k

    hi = 1.0
    while g(hi) <= 0.0:
        hi *= 2.0
    lo = hi / 2.0
    while g(lo) > 0.0:
        lo /= 2.0
    for _ in range(200):
        if hi - lo < 1e-9:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
