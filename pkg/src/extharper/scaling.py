"""Finite-size scaling of the susceptibility peak along parameter paths.

Pipeline: locate the chi_F peak per system size (multi-stage grid zoom plus
a golden-section polish), fit chi_max and the peak drift |q_max - q_c| as
power laws in N, and extract the collapse exponent nu by minimizing the
spread of the rescaled curves over a nu grid.

Sizes whose Fibonacci index satisfies m = 3l+1 develop a broken bond on the
metal-metal line (mu = 1), which turns their peak into an extremely narrow
resonance riding far above the smooth background; the zoom stages of
find_peak exist to track such peaks down to widths of order 1e-8.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fidelity import Direction, fidelity_susceptibility, metric_from_drivings
from .model import Driving, ModelPoint, build_driving, build_hamiltonian, fibonacci_approximant
from .spectrum import diagonalize

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# bracket width (in units of the requested resolution) below which the zoom
# stages hand over to golden-section refinement
_GOLDEN_HANDOVER = 64.0


class BracketError(RuntimeError):
    """The scanned window does not bracket an interior maximum."""


@dataclass
class PeakResult:
    """Peak location and height; samples holds every (q, chi) evaluated."""

    q_max: float
    chi_max: float
    refinement_width: float
    flagged: bool = False
    samples: np.ndarray | None = None


def _golden_max(fn, a: float, b: float, resolution: float):
    x1 = b - _INV_GOLDEN * (b - a)
    x2 = a + _INV_GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while b - a > resolution:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_GOLDEN * (b - a)
            f2 = fn(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_GOLDEN * (b - a)
            f1 = fn(x1)
    return a, b


def find_peak(
    fn,
    window,
    resolution: float,
    coarse: int = 21,
    pool: ThreadPoolExecutor | None = None,
    max_stages: int = 120,
) -> PeakResult:
    """Locate the maximum of fn on a window down to the given resolution.

    A coarse scan brackets the maximum, the bracket is re-scanned at
    progressively finer spacing (each stage shrinks the window five-fold,
    which keeps narrow resonances visible through their power-law tails),
    and a golden-section pass polishes the final bracket.  The returned
    maximum is the best sample ever evaluated, so chi_max dominates every
    sampled value along the path.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError(f"window must satisfy lo < hi, got ({lo}, {hi})")
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    if coarse < 5:
        raise ValueError("coarse scan needs at least 5 points")

    cache: dict[float, float] = {}

    def evaluate(qs):
        fresh = [q for q in qs if q not in cache]
        if fresh:
            mapper = pool.map if pool is not None else map
            for q, val in zip(fresh, mapper(fn, fresh)):
                cache[q] = float(val)
        return np.array([cache[q] for q in qs])

    w_lo, w_hi = lo, hi
    bracket = (lo, hi)
    for stage in range(max_stages):
        qs = [float(x) for x in np.linspace(w_lo, w_hi, coarse)]
        vals = evaluate(qs)
        i = int(np.argmax(vals))
        if stage == 0 and (i == 0 or i == coarse - 1):
            raise BracketError(
                "maximum sits on the window boundary; widen the window"
            )
        h = (w_hi - w_lo) / (coarse - 1)
        best = qs[i]
        bracket = (max(lo, best - h), min(hi, best + h))
        if 2.0 * h <= resolution:
            break
        if 2.0 * h <= _GOLDEN_HANDOVER * resolution:
            a, b = _golden_max(lambda q: evaluate([q])[0], *bracket, resolution)
            bracket = (a, b)
            break
        w_lo = max(lo, best - 2.0 * h)
        w_hi = min(hi, best + 2.0 * h)

    qs_all = np.array(sorted(cache))
    vals_all = np.array([cache[q] for q in qs_all])
    j = int(np.argmax(vals_all))
    return PeakResult(
        q_max=float(qs_all[j]),
        chi_max=float(vals_all[j]),
        refinement_width=float(bracket[1] - bracket[0]),
        samples=np.column_stack([qs_all, vals_all]),
    )


def estimate_half_width(fn, peak: PeakResult, max_iter: int = 60) -> float:
    """Mean distance from the peak at which fn falls to chi_max / 2.

    Brackets the half-maximum crossing on each side from the samples already
    collected by find_peak, then bisects.  Falls back to the distance to the
    outermost sample if a side never drops below half maximum.
    """
    target = 0.5 * peak.chi_max
    qs = peak.samples[:, 0]
    vals = peak.samples[:, 1]
    sides = []
    for sign in (-1.0, 1.0):
        mask = (qs - peak.q_max) * sign > 0.0
        side_q = qs[mask]
        side_v = vals[mask]
        order = np.argsort(np.abs(side_q - peak.q_max))
        side_q = side_q[order]
        side_v = side_v[order]
        below = np.nonzero(side_v < target)[0]
        if below.size == 0:
            if side_q.size:
                sides.append(abs(side_q[-1] - peak.q_max))
            continue
        outer = float(side_q[below[0]])
        first_below = below[0]
        inner = peak.q_max if first_below == 0 else float(side_q[first_below - 1])
        for _ in range(max_iter):
            if abs(outer - inner) <= 0.01 * abs(outer - peak.q_max):
                break
            mid = 0.5 * (inner + outer)
            if fn(mid) < target:
                outer = mid
            else:
                inner = mid
        sides.append(abs(0.5 * (inner + outer) - peak.q_max))
    if not sides:
        raise ValueError("no samples on either side of the peak")
    return float(np.mean(sides))


def fit_power_law(pairs):
    """Least-squares log-log fit; returns (exponent, prefactor, r_squared)."""
    pts = [(float(n), float(y)) for n, y in pairs]
    if len(pts) < 3:
        raise ValueError("need at least three (N, y) points")
    if any(n <= 0.0 or y <= 0.0 for n, y in pts):
        raise ValueError("power-law fit needs positive sizes and values")
    x = np.log([n for n, _ in pts])
    y = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(((y - fitted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot > 0.0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res < 1e-28 else 0.0
    return float(slope), float(math.exp(intercept)), float(r2)


@dataclass
class CollapseResult:
    nu: float
    residual: float
    nu_values: np.ndarray
    residuals: np.ndarray


def collapse_fit(curves, peaks, nu_grid=(0.3, 3.5, 0.01), grid_points: int = 101) -> CollapseResult:
    """Best collapse exponent on a nu grid.

    curves maps N -> (q array, chi array) and peaks maps N -> PeakResult.
    For each candidate nu the curves are rescaled to x = N^nu (q - q_max),
    y = (chi_max - chi)/chi, linearly interpolated onto the shared overlap
    of their x ranges, and scored by the mean variance across sizes; the
    arg-min nu wins.
    """
    if len(curves) < 2:
        raise ValueError("need curves for at least two sizes")
    lo, hi, step = (float(v) for v in nu_grid)
    if not (lo < hi and step > 0.0):
        raise ValueError("nu grid must satisfy lo < hi with positive step")
    prepared = []
    for n in sorted(curves):
        qs, chis = curves[n]
        qs = np.asarray(qs, dtype=float)
        chis = np.asarray(chis, dtype=float)
        pk = peaks[n]
        prepared.append((float(n), qs - pk.q_max, (pk.chi_max - chis) / chis))
    nus = np.arange(lo, hi + 0.5 * step, step)
    residuals = np.full(nus.shape, np.inf)
    for k, nu in enumerate(nus):
        xs = [n**nu * dq for n, dq, _ in prepared]
        x_lo = max(float(x.min()) for x in xs)
        x_hi = min(float(x.max()) for x in xs)
        if not x_lo < x_hi:
            continue
        xg = np.linspace(x_lo, x_hi, grid_points)
        ys = np.array(
            [np.interp(xg, x, y) for x, (_, _, y) in zip(xs, prepared)]
        )
        residuals[k] = float(((ys - ys.mean(axis=0)) ** 2).mean())
    if not np.isfinite(residuals).any():
        raise ValueError("rescaled curves never overlap on the nu grid")
    k = int(np.argmin(residuals))
    return CollapseResult(float(nus[k]), float(residuals[k]), nus, residuals)


class SusceptibilityPath:
    """chi_F along the straight path (lam, mu) = base + q * direction.

    Precomputes the q-independent pieces (bare chain plus both driving
    matrices) so each evaluation costs one assembly and one
    diagonalization.  Results are cached by q; evaluations that hit a
    near-degenerate ground state increment unreliable_hits.
    """

    def __init__(self, base_lam, base_mu, direction: Direction, m: int,
                 ky: float = 0.0, periodic: bool = True):
        self.base_lam = float(base_lam)
        self.base_mu = float(base_mu)
        self.direction = direction
        self.periodic = bool(periodic)
        self.approximant = fibonacci_approximant(m)
        zero = ModelPoint(0.0, 0.0, self.approximant, ky)
        self.ky = zero.ky
        self._h0 = build_hamiltonian(zero, periodic=self.periodic)
        self._h_lam = build_driving(zero, Driving.LAMBDA, periodic=self.periodic)
        self._h_mu = build_driving(zero, Driving.MU, periodic=self.periodic)
        self.cache: dict[float, float] = {}
        self.unreliable_hits = 0

    @property
    def size(self) -> int:
        return self.approximant.f_m

    def point(self, q: float):
        return (
            self.base_lam + q * self.direction.n_lam,
            self.base_mu + q * self.direction.n_mu,
        )

    def __call__(self, q: float) -> float:
        q = float(q)
        hit = self.cache.get(q)
        if hit is not None:
            return hit
        lam, mu = self.point(q)
        if lam < 0.0 or mu < 0.0:
            raise ValueError(f"path leaves the valid parameter region at q={q}")
        h = self._h0 + lam * self._h_lam + mu * self._h_mu
        es = diagonalize(h, check_hermitian=False)
        mt = metric_from_drivings(es, self._h_lam, self._h_mu)
        if not mt.reliable:
            self.unreliable_hits += 1
        chi = fidelity_susceptibility(mt, self.direction)
        self.cache[q] = chi
        return chi


@dataclass(frozen=True)
class Transition:
    name: str
    base_lam: float
    base_mu: float
    direction: Direction
    q_c: float
    window: tuple
    split_by_residue: bool


TRANSITIONS = {
    "mmt": Transition("mmt", 1.0, 0.0, Direction(0.0, 1.0), 1.0, (0.9, 1.1), True),
    "mit-i-ii": Transition("mit-i-ii", 0.0, 0.5, Direction(1.0, 0.0), 2.0, (1.9, 2.1), False),
    "mit-iii-ii": Transition("mit-iii-ii", 0.0, 1.5, Direction(1.0, 0.0), 3.0, (2.9, 3.1), False),
}


@dataclass
class ScalingResult:
    """Fitted exponents for one residue group of system sizes."""

    group: str
    m_indices: list[int]
    sizes: list[int]
    q_maxes: list[float]
    chi_maxes: list[float]
    alpha: float
    alpha_prefactor: float
    r_squared_alpha: float
    beta: float
    beta_prefactor: float
    r_squared_beta: float
    # True when any |q_max - q_c| sits at the peak-refinement floor, i.e.
    # the drift was too small to measure and beta mostly fits noise
    beta_resolution_limited: bool
    drift_sign: int
    nu: float
    collapse_residual: float
    ratio_tolerance: float
    flagged: bool = False

    @property
    def alpha_over_nu(self) -> float:
        return self.alpha / self.nu

    @property
    def ratio_ok(self) -> bool:
        return abs(self.alpha_over_nu - 2.0) <= self.ratio_tolerance


def partition_by_residue(size_indices):
    """Split approximant indices into the m = 3l+1 class and the rest."""
    ms = sorted(int(m) for m in size_indices)
    return {
        "m=3l+1": [m for m in ms if m % 3 == 1],
        "m!=3l+1": [m for m in ms if m % 3 != 1],
    }


def scaling_report(
    transition: str,
    size_indices,
    resolution: float = 1e-9,
    curve_points: int = 41,
    curve_span: float = 5.0,
    nu_grid=(0.3, 3.5, 0.01),
    ratio_tolerance: float = 0.2,
    ky: float = 0.0,
    coarse: int = 21,
    threads: int = 1,
    periodic: bool = False,
) -> list[ScalingResult]:
    """Run the full pipeline for one transition over the given sizes.

    For the metal-metal transition the sizes are fitted separately per
    residue class (m = 3l+1 versus the rest); the metal-insulator
    transitions use a single group.  Groups with fewer than three sizes
    are skipped.

    Scaling runs default to open chains: the resonance peaks of the
    m = 3l+1 sizes come from the chain splitting into two segments when
    the mu = 1 bond breaks, which a periodic ring heals by wrapping
    around.  Pass periodic=True to scale the ring instead.
    """
    try:
        t = TRANSITIONS[transition]
    except KeyError:
        raise ValueError(
            f"unknown transition {transition!r}; expected one of {sorted(TRANSITIONS)}"
        ) from None
    if t.split_by_residue:
        groups = partition_by_residue(size_indices)
    else:
        groups = {"all": sorted(int(m) for m in size_indices)}
    groups = {label: ms for label, ms in groups.items() if len(ms) >= 3}
    if not groups:
        raise ValueError("every fitted group needs at least three sizes")

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    results = []
    try:
        for label, ms in groups.items():
            peaks: dict[int, PeakResult] = {}
            curves: dict[int, tuple] = {}
            flagged = False
            for m in ms:
                path = SusceptibilityPath(
                    t.base_lam, t.base_mu, t.direction, m, ky, periodic=periodic
                )
                pk = find_peak(path, t.window, resolution, coarse=coarse, pool=pool)
                pk.flagged = path.unreliable_hits > 0
                flagged = flagged or pk.flagged
                hw = estimate_half_width(path, pk)
                q_lo = max(t.window[0], pk.q_max - curve_span * hw)
                q_hi = min(t.window[1], pk.q_max + curve_span * hw)
                qs = np.linspace(q_lo, q_hi, curve_points)
                mapper = pool.map if pool is not None else map
                chis = np.array(list(mapper(path, qs)))
                peaks[path.size] = pk
                curves[path.size] = (qs, chis)
            ns = sorted(peaks)
            alpha, a_pref, r2_a = fit_power_law(
                [(n, peaks[n].chi_max) for n in ns]
            )
            # an exactly-zero drift is unmeasurable, not fit-worthy; substitute
            # the refinement floor so the log-log fit stays defined
            drifts = [abs(peaks[n].q_max - t.q_c) or resolution for n in ns]
            beta, b_pref, r2_b = fit_power_law(list(zip(ns, drifts)))
            drift_floor = any(d < 10.0 * resolution for d in drifts)
            collapse = collapse_fit(curves, peaks, nu_grid)
            results.append(
                ScalingResult(
                    group=label,
                    m_indices=list(ms),
                    sizes=ns,
                    q_maxes=[peaks[n].q_max for n in ns],
                    chi_maxes=[peaks[n].chi_max for n in ns],
                    alpha=alpha,
                    alpha_prefactor=a_pref,
                    r_squared_alpha=r2_a,
                    beta=beta,
                    beta_prefactor=b_pref,
                    r_squared_beta=r2_b,
                    beta_resolution_limited=drift_floor,
                    drift_sign=int(np.sign(peaks[ns[-1]].q_max - t.q_c)),
                    nu=collapse.nu,
                    collapse_residual=collapse.residual,
                    ratio_tolerance=ratio_tolerance,
                    flagged=flagged,
                )
            )
    finally:
        if pool is not None:
            pool.shutdown()
    return results


SCALING_CSV_COLUMNS = (
    "group",
    "N",
    "q_max",
    "chi_max",
    "alpha",
    "beta",
    "nu",
    "alpha_over_nu",
    "r2_alpha",
    "r2_beta",
    "collapse_residual",
)


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def scaling_csv_lines(results) -> list[str]:
    lines = [",".join(SCALING_CSV_COLUMNS)]
    for res in results:
        for n, q_max, chi_max in zip(res.sizes, res.q_maxes, res.chi_maxes):
            lines.append(
                ",".join(
                    [
                        res.group,
                        str(n),
                        _fmt(q_max),
                        _fmt(chi_max),
                        _fmt(res.alpha),
                        _fmt(res.beta),
                        _fmt(res.nu),
                        _fmt(res.alpha_over_nu),
                        _fmt(res.r_squared_alpha),
                        _fmt(res.r_squared_beta),
                        _fmt(res.collapse_residual),
                    ]
                )
            )
    return lines


def write_scaling_csv(path, results) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fp:
        fp.write("\n".join(scaling_csv_lines(results)) + "\n")
