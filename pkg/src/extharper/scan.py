"""Grid sweeps over the (lam, mu) plane and threshold phase classification.

Every grid point is diagonalized in full, so each record always carries the
gap, ground-state entropy, ground-state IPR (sum-of-squares convention, see
the ground_ipr_sum_z2 column), spectrum-averaged entropy, and a phase label.
Fidelity against a reference point and chi_F along a direction are added on
request.  Grid points are independent; rows are emitted in row-major order
over (lam, mu) regardless of how many worker threads computed them.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .entropy import entropy_profile, spectrum_entropy
from .fidelity import Direction, fidelity, fidelity_susceptibility, metric_from_drivings
from .model import Driving, ModelPoint, build_driving, build_hamiltonian, fibonacci_approximant
from .spectrum import ComputationError, diagonalize, ground_state

VALID_QUANTITIES = frozenset({"fidelity", "fs", "gap", "entropy"})


class BoundaryNotFound(RuntimeError):
    """No clear entropy-derivative extremum inside the sweep window."""


@dataclass(frozen=True)
class PhaseThresholds:
    """Classifier knobs: entropy cutoffs plus the critical-line band width."""

    high: float = 0.7
    low: float = 0.4
    band: float = 0.08


@dataclass(frozen=True)
class GridSpec:
    """Rectangular (lam, mu) grid: ranges are (lo, hi, steps) with steps >= 2."""

    lam_range: tuple
    mu_range: tuple
    m: int = 15
    ky: float = 0.0
    reference: tuple | None = None
    direction: Direction | None = None

    def __post_init__(self):
        for name, rng in (("lam_range", self.lam_range), ("mu_range", self.mu_range)):
            lo, hi, steps = rng
            if not float(lo) < float(hi):
                raise ValueError(f"{name}: lo must be < hi, got {rng}")
            if int(steps) < 2:
                raise ValueError(f"{name}: need at least 2 steps, got {rng}")

    def lam_values(self) -> np.ndarray:
        lo, hi, steps = self.lam_range
        return np.linspace(float(lo), float(hi), int(steps))

    def mu_values(self) -> np.ndarray:
        lo, hi, steps = self.mu_range
        return np.linspace(float(lo), float(hi), int(steps))

    def default_thresholds(self) -> PhaseThresholds:
        lam_step = (self.lam_range[1] - self.lam_range[0]) / (int(self.lam_range[2]) - 1)
        mu_step = (self.mu_range[1] - self.mu_range[0]) / (int(self.mu_range[2]) - 1)
        return PhaseThresholds(band=2.0 * max(lam_step, mu_step))


@dataclass
class DiagnosticsRecord:
    lam: float
    mu: float
    gap: float = math.nan
    ground_entropy: float = math.nan
    ground_ipr: float = math.nan
    spectrum_entropy: float = math.nan
    phase_label: str = "unclassified"
    fidelity: float | None = None
    chi_f: float | None = None
    chi_f_reliable: bool | None = None
    error: str = ""


# critical lines of the phase diagram: mu = 1 for lam <= 2, lam = 2 for
# mu <= 1, and the ray lam = 2 mu beyond the bicritical point (2, 1)
_SEGMENTS = (
    ((0.0, 1.0), (2.0, 1.0), False),
    ((2.0, 0.0), (2.0, 1.0), False),
    ((2.0, 1.0), (4.0, 2.0), True),
)


def distance_to_critical_lines(lam: float, mu: float) -> float:
    """Euclidean distance to the nearest of the three critical lines."""
    best = math.inf
    for (ax, ay), (bx, by), is_ray in _SEGMENTS:
        ux, uy = bx - ax, by - ay
        t = ((lam - ax) * ux + (mu - ay) * uy) / (ux * ux + uy * uy)
        t = max(t, 0.0) if is_ray else min(max(t, 0.0), 1.0)
        best = min(best, math.hypot(lam - (ax + t * ux), mu - (ay + t * uy)))
    return best


def classify_phase(record: DiagnosticsRecord, thresholds: PhaseThresholds | None = None) -> str:
    """Label a record by critical-line proximity and spectrum entropy.

    Proximity wins over the entropy cuts: points on a metal-insulator line
    have small entropy and would otherwise read as insulating.
    """
    th = thresholds if thresholds is not None else PhaseThresholds()
    ev = record.spectrum_entropy
    if not math.isfinite(ev):
        return "unclassified"
    if distance_to_critical_lines(record.lam, record.mu) <= th.band:
        return "boundary"
    if ev >= th.high and record.mu < 1.0:
        return "I"
    if ev >= th.high and record.mu > 1.0:
        return "III"
    if ev <= th.low:
        return "II"
    return "unclassified"


def run_scan(spec: GridSpec, quantities=("gap", "entropy"), thresholds=None, threads: int = 1):
    """One DiagnosticsRecord per grid point, row-major over (lam, mu).

    The reference ground state for fidelity maps is diagonalized exactly
    once.  A per-point eigensolver failure is recorded in that row's error
    field and the scan continues.
    """
    qset = set(quantities)
    unknown = qset - VALID_QUANTITIES
    if unknown:
        raise ValueError(f"unknown quantities: {sorted(unknown)}")
    if "fidelity" in qset and spec.reference is None:
        raise ValueError("fidelity maps need a reference point in the GridSpec")
    if "fs" in qset and spec.direction is None:
        raise ValueError("fs maps need a direction in the GridSpec")
    th = thresholds if thresholds is not None else spec.default_thresholds()

    approx = fibonacci_approximant(spec.m)
    zero = ModelPoint(0.0, 0.0, approx, spec.ky)
    h0 = build_hamiltonian(zero)
    h_lam = build_driving(zero, Driving.LAMBDA)
    h_mu = build_driving(zero, Driving.MU)

    ref_state = None
    if "fidelity" in qset:
        ref_lam, ref_mu = (float(v) for v in spec.reference)
        ref_es = diagonalize(h0 + ref_lam * h_lam + ref_mu * h_mu, check_hermitian=False)
        ref_state = ground_state(ref_es)

    want_fs = "fs" in qset

    def compute(pt) -> DiagnosticsRecord:
        lam, mu = pt
        rec = DiagnosticsRecord(lam=lam, mu=mu)
        try:
            es = diagonalize(h0 + lam * h_lam + mu * h_mu, check_hermitian=False)
        except ComputationError as exc:
            rec.error = str(exc)
            return rec
        gs = ground_state(es)
        prof = entropy_profile(gs.amplitudes)
        rec.gap = gs.gap
        rec.ground_entropy = prof.state_entropy_scaled
        rec.ground_ipr = prof.ipr
        rec.spectrum_entropy = spectrum_entropy(es).value
        if ref_state is not None:
            rec.fidelity = fidelity(gs, ref_state)
        if want_fs:
            mt = metric_from_drivings(es, h_lam, h_mu)
            rec.chi_f = fidelity_susceptibility(mt, spec.direction)
            rec.chi_f_reliable = mt.reliable
        rec.phase_label = classify_phase(rec, th)
        return rec

    points = [
        (float(lam), float(mu))
        for lam in spec.lam_values()
        for mu in spec.mu_values()
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(compute, points))
    return [compute(pt) for pt in points]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def records_to_csv(records, quantities=("gap", "entropy")) -> str:
    """Serialize records with a header row; floats keep 17 significant digits."""
    qset = set(quantities)
    columns = ["lambda", "mu"]
    if "fidelity" in qset:
        columns.append("fidelity")
    if "fs" in qset:
        columns.extend(["chi_f", "chi_f_reliable"])
    columns.extend(
        ["gap", "ground_entropy", "ground_ipr_sum_z2", "spectrum_entropy", "phase_label", "error"]
    )
    lines = [",".join(columns)]
    for rec in records:
        row = [_fmt(rec.lam), _fmt(rec.mu)]
        if "fidelity" in qset:
            row.append(_fmt(rec.fidelity))
        if "fs" in qset:
            row.extend([_fmt(rec.chi_f), _fmt(rec.chi_f_reliable)])
        row.extend(
            [
                _fmt(rec.gap),
                _fmt(rec.ground_entropy),
                _fmt(rec.ground_ipr),
                _fmt(rec.spectrum_entropy),
                rec.phase_label,
                rec.error,
            ]
        )
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_records_csv(path, records, quantities=("gap", "entropy")) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fp:
        fp.write(records_to_csv(records, quantities))


def boundary_sweep(fix: str, value: float, window, step: float = 0.01,
                   m: int = 15, ky: float = 0.0, threads: int = 1):
    """Spectrum entropy along a 1-D cut, with its centered derivative.

    fix names the held parameter ("lambda" or "mu"); the other one sweeps
    the window on a grid of the given step.  Returns (q, entropy, d/dq)
    arrays; the derivative is NaN at the endpoints.
    """
    if fix not in ("lambda", "mu"):
        raise ValueError(f"fix must be 'lambda' or 'mu', got {fix!r}")
    lo, hi = (float(v) for v in window)
    if not lo < hi:
        raise ValueError("window must satisfy lo < hi")
    count = int(round((hi - lo) / step)) + 1
    if count < 5:
        raise ValueError("window/step leaves fewer than 5 sweep points")
    qs = np.linspace(lo, hi, count)
    approx = fibonacci_approximant(m)
    zero = ModelPoint(0.0, 0.0, approx, ky)
    h0 = build_hamiltonian(zero)
    h_lam = build_driving(zero, Driving.LAMBDA)
    h_mu = build_driving(zero, Driving.MU)

    def entropy_at(q: float) -> float:
        lam, mu = (value, q) if fix == "lambda" else (q, value)
        es = diagonalize(h0 + lam * h_lam + mu * h_mu, check_hermitian=False)
        return spectrum_entropy(es).value

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            ev = np.array(list(pool.map(entropy_at, qs)))
    else:
        ev = np.array([entropy_at(q) for q in qs])
    deriv = np.full(count, math.nan)
    deriv[1:-1] = (ev[2:] - ev[:-2]) / (qs[2:] - qs[:-2])
    return qs, ev, deriv


def locate_from_sweep(qs, ev, deriv) -> float:
    """Sweep value maximizing |d<entropy>/dq| from boundary_sweep arrays.

    Raises BoundaryNotFound when the extremum is not clearly above the
    sweep's background variation (flat entropy or no dominant derivative).
    """
    mags = np.abs(deriv[1:-1])
    peak = float(mags.max())
    median = float(np.median(mags))
    if float(ev.max() - ev.min()) < 0.05 or (median > 0.0 and peak < 3.0 * median):
        raise BoundaryNotFound(
            f"no clear entropy drop in the window (range {ev.max() - ev.min():.3g}, "
            f"peak/median derivative {peak:.3g}/{median:.3g})"
        )
    return float(qs[1:-1][int(np.argmax(mags))])


def boundary_locate(fix: str, value: float, window, step: float = 0.01,
                    m: int = 15, ky: float = 0.0, threads: int = 1) -> float:
    """Locate the phase boundary crossed by a 1-D entropy sweep."""
    return locate_from_sweep(*boundary_sweep(fix, value, window, step, m, ky, threads))
