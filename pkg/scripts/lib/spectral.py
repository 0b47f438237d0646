"""Finite-difference bound-state solver and isospectrality comparison.

-psi'' + V psi = E psi on a uniform grid with Dirichlet ends (units with
hbar = 2m = 1), solved as a symmetric tridiagonal eigenproblem.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from lib.errors import DomainError, ParameterError
from lib.families import Family, Params, couplings, predicted_levels, series_x_max
from lib.load_config import setting
from lib.specfun import DEFAULT_SERIES, SeriesConfig
from lib.superpotential import build

logger = logging.getLogger(__name__)

MIN_NODES = 200
SPECTRUM_TOL = 1e-4
GAP_TOL = 1e-3


@dataclass(frozen=True)
class Grid:
    """Uniform grid: Dirichlet walls at x_min and x_max, n interior nodes."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise DomainError(f"Grid needs x_min < x_max, got {self.x_min} and {self.x_max}")
        if self.n < MIN_NODES:
            raise DomainError(f"Grid needs at least {MIN_NODES} interior nodes, got {self.n}")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n + 1)

    def nodes(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(1, self.n + 1)

    def refined(self) -> "Grid":
        """Same walls, half the spacing."""
        return Grid(self.x_min, self.x_max, 2 * self.n + 1)

    def check(self, fam: Family) -> "Grid":
        lo, hi = fam.domain
        if self.x_min < lo or self.x_max > hi:
            raise DomainError(f"Grid [{self.x_min}, {self.x_max}] leaves the {fam.slug} domain ({lo}, {hi})")
        return self

    def to_dict(self) -> dict:
        return {"xMin": self.x_min, "xMax": self.x_max, "n": self.n, "h": self.h}


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    k: int
    grid: Grid
    richardson: bool = False

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "k": self.k,
            "grid": self.grid.to_dict(),
            "richardson": self.richardson,
        }


def _plain_levels(potential: Callable, grid: Grid, k: int) -> np.ndarray:
    xs = grid.nodes()
    v = np.asarray(potential(xs), dtype=float)
    if not np.all(np.isfinite(v)):
        bad = xs[~np.isfinite(v)][0]
        raise DomainError(f"Potential is not finite at grid node x={bad}")
    inv_h2 = 1.0 / grid.h**2
    diag = 2.0 * inv_h2 + v
    off = np.full(grid.n - 1, -inv_h2)
    logger.debug("eigensolve: n=%d h=%.3g k=%d", grid.n, grid.h, k)
    return eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, k - 1))


def solve_bound_states(potential: Callable, grid: Grid, k: int, richardson: bool = False) -> Spectrum:
    """Lowest k eigenvalues of -d^2/dx^2 + V.

    With richardson=True the h and h/2 solves are combined as (4 E_{h/2} - E_h) / 3.
    """
    if k < 1 or k > grid.n // 10:
        raise DomainError(f"k={k} must lie in [1, n/10] for n={grid.n}")
    levels = _plain_levels(potential, grid, k)
    if richardson:
        fine = _plain_levels(potential, grid.refined(), k)
        levels = (4.0 * fine - levels) / 3.0
    if not np.all(np.diff(levels) > 0):
        raise DomainError("Eigenvalues are not strictly ascending; grid too coarse")
    return Spectrum(eigenvalues=np.asarray(levels), k=k, grid=grid, richardson=richardson)


# ── Level matching ──────────────────────────────────────────────────


def close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class LevelMatch:
    """a[i] ~ b[i + offset] for every overlapping index."""

    offset: Optional[int]
    shared: int
    max_error: float

    @property
    def matched(self) -> bool:
        return self.offset is not None

    def to_dict(self) -> dict:
        return {"offset": self.offset, "shared": self.shared, "maxRelError": self.max_error, "matched": self.matched}


def _relative_errors(a, b, offset):
    pairs = [(a[i], b[i + offset]) for i in range(len(a)) if 0 <= i + offset < len(b)]
    return [abs(x - y) / max(1.0, abs(x), abs(y)) for x, y in pairs]


ALL_OFFSETS = (0, 1, -1)
PARTNER_OFFSETS = (1, -1)


def match_levels(a, b, tol: float, offsets=ALL_OFFSETS) -> LevelMatch:
    """Find the offset among `offsets` under which the two level lists agree.

    Partner potentials differ by one zero mode, so they are matched with
    PARTNER_OFFSETS; classical comparisons use offset 0 as well.
    """
    if min(len(a), len(b)) == 0:
        # nothing to compare; at most one unmatched level is still consistent
        diff = len(b) - len(a)
        return LevelMatch(diff if diff in offsets else None, 0, 0.0)
    best = LevelMatch(None, 0, math.inf)
    for offset in offsets:
        errs = _relative_errors(a, b, offset)
        if not errs:
            continue
        worst = max(errs)
        if worst <= tol:
            return LevelMatch(offset, len(errs), worst)
        if worst < best.max_error:
            best = LevelMatch(None, len(errs), worst)
    return best


# ── Isospectrality ──────────────────────────────────────────────────


def default_grid(fam: Family, p: Params, k: int, config: Optional[dict] = None) -> Grid:
    """Family default: left wall spectral.xMin, right wall beyond the sought levels."""
    config = config or {}
    x_min = float(setting(config, "spectral.xMin"))
    n = int(setting(config, "spectral.n"))
    headroom = float(setting(config, "spectral.headroom"))
    if fam.kind == "radial":
        G, _ = couplings(fam, p)
        top = predicted_levels(fam, p, k)[-1] + 2 * float(G) + 1
        x_max = max(12.0, math.sqrt(top + headroom))
    elif fam.kind == "trigonometric":
        x_max = math.pi / 2 - x_min
    else:
        x_max = 20.0
    return Grid(x_min, x_max, n).check(fam)


def clip_to_series(fam: Family, grid: Grid, series: SeriesConfig = DEFAULT_SERIES) -> Grid:
    """Pull the right wall of a continuous trigonometric grid inside the 2F1 margin."""
    if fam is not Family.TRIG_DPT_CONTL or grid.x_max <= series_x_max(series):
        return grid
    hi = series_x_max(series)
    logger.warning("Clipping %s spectral wall from %.6g to %.6g (2F1 margin %.3g)", fam.slug, grid.x_max, hi, series.margin)
    return Grid(grid.x_min, hi, grid.n)


@dataclass
class IsospectralityReport:
    family: Family
    params: Params
    k: int
    tolerance: float
    gap_tolerance: float
    spectra: dict
    partner_match: LevelMatch
    extended_vs_classical: LevelMatch
    extended_vs_classical_v: LevelMatch
    predicted: List[float]
    expected_gap: Optional[float]
    observed_gap: Optional[float]
    mean_gap: Optional[float]
    threshold: Optional[float] = None
    bound_states: Optional[int] = None
    extras: dict = field(default_factory=dict)

    @property
    def gap_ok(self) -> bool:
        """Mean spacing of the zero-mode spectrum against the predicted mean spacing."""
        if self.expected_gap is None or self.mean_gap is None:
            return True
        return abs(self.mean_gap - self.expected_gap) <= self.gap_tolerance * abs(self.expected_gap)

    @property
    def ok(self) -> bool:
        return (
            self.partner_match.matched
            and self.extended_vs_classical.matched
            and self.extended_vs_classical_v.matched
            and self.gap_ok
        )

    def to_dict(self) -> dict:
        out = {
            "family": self.family.slug,
            "params": self.params.to_dict(),
            "k": self.k,
            "tolerance": self.tolerance,
            "gapTolerance": self.gap_tolerance,
            "spectra": {name: s.to_dict() for name, s in self.spectra.items()},
            "partnerMatch": self.partner_match.to_dict(),
            "extendedVsClassical": self.extended_vs_classical.to_dict(),
            "extendedVsClassicalV": self.extended_vs_classical_v.to_dict(),
            "predicted": self.predicted,
            "expectedGap": self.expected_gap,
            "observedGap": self.observed_gap,
            "meanGap": self.mean_gap,
            "gapOk": self.gap_ok,
        }
        if self.threshold is not None:
            out["threshold"] = self.threshold
            out["boundStates"] = self.bound_states
        if self.extras:
            out["extras"] = dict(self.extras)
        out["ok"] = self.ok
        return out


def _below(levels: np.ndarray, threshold: Optional[float]) -> np.ndarray:
    return levels if threshold is None else levels[levels < threshold]


def isospectrality_report(
    fam: Family,
    p: Params,
    k: int = 5,
    grid: Optional[Grid] = None,
    tol: float = SPECTRUM_TOL,
    gap_tol: float = GAP_TOL,
    richardson: bool = True,
    series: SeriesConfig = DEFAULT_SERIES,
    config: Optional[dict] = None,
) -> IsospectralityReport:
    """Compare extended and classical partner spectra and the level spacing."""
    if k < 2:
        raise ParameterError(f"Isospectrality needs k >= 2, got {k}")
    requested = (grid or default_grid(fam, p, k, config)).check(fam)
    grid = clip_to_series(fam, requested, series)
    extras = {}
    if grid != requested:
        extras["clippedWall"] = {"requested": requested.x_max, "used": grid.x_max}
    ext = build(fam, p, series)
    extended, classical = ext.partners_reduced(), ext.classical()
    spectra = {
        "V": solve_bound_states(extended.v, grid, k, richardson),
        "VTilde": solve_bound_states(extended.v_tilde, grid, k, richardson),
        "V0": solve_bound_states(classical.v, grid, k, richardson),
        "V0Tilde": solve_bound_states(classical.v_tilde, grid, k, richardson),
    }
    threshold = None
    if fam.kind == "hyperbolic":
        G, H = couplings(fam, p)
        threshold = float(G - H) ** 2
    levels = {name: _below(s.eigenvalues, threshold) for name, s in spectra.items()}
    vt = levels["VTilde"]
    predicted = [e for e in predicted_levels(fam, p, k) if threshold is None or e < threshold]
    shared = min(vt.size, len(predicted))
    observed_gap = float(vt[1] - vt[0]) if vt.size >= 2 else None
    mean_gap = float(np.mean(np.diff(vt[:shared]))) if shared >= 2 else None
    expected_gap = float(np.mean(np.diff(predicted[:shared]))) if shared >= 2 else None
    report = IsospectralityReport(
        family=fam,
        params=p,
        k=k,
        tolerance=tol,
        gap_tolerance=gap_tol,
        spectra=spectra,
        partner_match=match_levels(levels["V"], vt, tol, PARTNER_OFFSETS),
        extended_vs_classical=match_levels(vt, levels["V0Tilde"], tol),
        extended_vs_classical_v=match_levels(levels["V"], levels["V0"], tol),
        predicted=predicted,
        expected_gap=expected_gap,
        observed_gap=observed_gap,
        mean_gap=mean_gap,
        threshold=threshold,
        bound_states=int(vt.size) if threshold is not None else None,
        extras=extras,
    )
    logger.debug(
        "isospectrality %s: partner offset=%s, classical offset=%s, gap %.6g vs %s",
        p.text(fam),
        report.partner_match.offset,
        report.extended_vs_classical.offset,
        observed_gap if observed_gap is not None else float("nan"),
        expected_gap,
    )
    return report


def potential_table(fam: Family, p: Params, xs, series: SeriesConfig = DEFAULT_SERIES) -> List[tuple]:
    """Rows (x, V, V~, V0, V0~) for plot-data emission."""
    ext = build(fam, p, series)
    extended, classical = ext.partners_reduced(), ext.classical()
    xs = np.asarray(xs, dtype=float)
    cols = [xs, extended.v(xs), extended.v_tilde(xs), classical.v(xs), classical.v_tilde(xs)]
    return [tuple(float(c[i]) for c in cols) for i in range(xs.size)]


POTENTIAL_COLUMNS = ("x", "V", "VTilde", "V0", "V0Tilde")
