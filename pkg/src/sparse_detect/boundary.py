"""Detection-boundary engine for sparse mixture testing.

Two dual routes are kept deliberately independent:

* closed-form boundaries (:func:`boundary_closed_form`) evaluate the
  exact piecewise formulas for the classical location model, the
  heteroscedastic normal model, dilated signal supports, generalized
  Gaussian convolutions, and generalized Gaussian location mixtures;
* numeric boundaries (:func:`beta_sharp`, :func:`beta_star_general`,
  :func:`beta_convolution`) compute essential suprema of exponent
  functions on dense grids with golden-section refinement.

Both must agree; the test suite enforces that on full parameter grids.

Exponent functions live on the u-axis (location scaled by sqrt(2 ln n))
or the s-axis (tail exponents of null quantiles, s = u^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import logsumexp

from .errors import (
    AdmissibilityError,
    EmptySupportError,
    HCBoundaryUndefinedError,
    InvalidParameterError,
    OutOfRegimeError,
    WrongParametrizationError,
)

__all__ = [
    "GRID_POINTS",
    "ExponentFunction",
    "BoundaryResult",
    "AdmissibilityReport",
    "alpha_family",
    "gamma_from_alpha",
    "exponent_from_csv",
    "check_admissible",
    "beta_sharp",
    "beta_star_general",
    "hellinger_exponent",
    "tail_exponent",
    "hc_achievable_boundary",
    "boundary_closed_form",
    "beta_convolution",
    "ess_sup_grid",
    "laplace_log_integral",
    "beta_star_idj",
]

GRID_POINTS = 20001
_REFINE_TOL = 1e-10
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_ADMISSIBLE_SLACK = 1e-9
_LADDER = tuple(2.0**k for k in range(4, 13))
_LADDER_FINAL_TOL = 0.05


# ---------------------------------------------------------------------------
# exponent functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentFunction:
    """Limit exponent of a normalized log-likelihood ratio.

    Closed-form families carry an evaluator; sampled grids carry only
    abscissae and values (strictly increasing xs; -inf values encode
    regions without support).  ``convolutional`` asserts convexity,
    which :func:`check_admissible` verifies on the grid.
    """

    axis: str
    family: str
    params: dict = field(default_factory=dict)
    xs: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    convolutional: bool = False
    scale: float = 1.0

    def __post_init__(self):
        if self.axis not in ("u", "s"):
            raise InvalidParameterError(f"axis must be 'u' or 's', got {self.axis!r}")
        if self.xs is not None:
            xs = np.asarray(self.xs, dtype=float)
            values = np.asarray(self.values, dtype=float)
            if xs.ndim != 1 or xs.size == 0 or xs.shape != values.shape:
                raise InvalidParameterError("grid xs and values must be equal-length 1-D")
            if np.any(np.diff(xs) <= 0):
                raise InvalidParameterError("grid abscissae must be strictly increasing")
            if np.any(np.isnan(values)) or np.any(np.isposinf(values)):
                raise InvalidParameterError(
                    "grid values must be finite or -inf (off-support marker)"
                )
            object.__setattr__(self, "xs", xs)
            object.__setattr__(self, "values", values)

    @classmethod
    def from_grid(cls, xs, values, axis: str = "u", convolutional: bool = False):
        return cls(
            axis=axis,
            family="grid",
            xs=np.asarray(xs, dtype=float),
            values=np.asarray(values, dtype=float),
            convolutional=convolutional,
            scale=float(np.max(np.abs(xs))) or 1.0,
        )

    @property
    def has_closed_form(self) -> bool:
        return self.family != "grid"

    def domain(self) -> tuple[float, float]:
        if self.family == "grid":
            return float(self.xs[0]), float(self.xs[-1])
        width = max(5.0, 2.0 * self.scale)
        if self.axis == "u":
            return -width, width
        return 0.0, width

    def evaluate(self, x):
        """Evaluate the closed form (vectorized); grids interpolate linearly."""
        x = np.asarray(x, dtype=float)
        if self.family == "grid":
            return np.interp(x, self.xs, self.values)
        return _FAMILY_EVAL[self.family](x, self.params)

    def grid(self, points: int = GRID_POINTS) -> tuple[np.ndarray, np.ndarray]:
        if self.family == "grid":
            return self.xs, self.values
        lo, hi = self.domain()
        xs = np.linspace(lo, hi, points)
        return xs, np.asarray(self.evaluate(xs), dtype=float)


@dataclass(frozen=True)
class BoundaryResult:
    """A detection-boundary value with its maximizer and provenance."""

    beta: float
    maximizer: float
    method: str
    grid_resolution: float = 0.0


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    violations: tuple[str, ...]
    ladder_values: tuple[float, ...]

    def __bool__(self) -> bool:
        return self.admissible


# ---------------------------------------------------------------------------
# closed-form family evaluators
# ---------------------------------------------------------------------------


def _eval_idj(u, params):
    r = params["r"]
    return 2.0 * u * math.sqrt(r) - r


def _eval_symmetric_idj(u, params):
    r = params["r"]
    return 2.0 * np.abs(u) * math.sqrt(r) - r


def _eval_hetero(u, params):
    r, sigma2 = params["r"], params["sigma2"]
    return u * u - (u - math.sqrt(r)) ** 2 / sigma2


def _eval_dilate(u, params):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if "points" in params:
        pts = np.asarray(params["points"], dtype=float)
        vals = 2.0 * u[:, None] * pts[None, :] - pts[None, :] ** 2
        out = vals.max(axis=1)
    else:
        a, b = params["interval"]
        x = np.clip(u, a, b)  # unconstrained maximizer of 2ux - x^2 is x = u
        out = 2.0 * u * x - x * x
    return out if out.shape != (1,) else out[0]


def _eval_conv_from_f(u, params):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    ts = np.asarray(params["ts"], dtype=float)
    fs = np.asarray(params["fs"], dtype=float)
    finite = np.isfinite(fs)
    ts, fs = ts[finite], fs[finite]
    out = np.empty(u.shape)
    for start in range(0, u.size, 4096):
        blk = u[start : start + 4096]
        penalty = (blk[:, None] - ts[None, :]) ** 2 + fs[None, :]
        out[start : start + 4096] = blk * blk - penalty.min(axis=1)
    return out if out.shape != (1,) else out[0]


def _eval_gen_gaussian_conv(u, params):
    r, tau = params["r"], params["tau"]
    u = np.atleast_1d(np.asarray(u, dtype=float))
    uu = np.abs(u)  # the exponent is even in u
    sqrt_r = math.sqrt(r)
    out = np.empty(u.shape)
    for start in range(0, u.size, 4096):
        blk = uu[start : start + 4096]
        zhi = blk / sqrt_r + 1.0
        zgrid = np.linspace(0.0, 1.0, 513)[None, :] * zhi[:, None]
        pen = (blk[:, None] - sqrt_r * zgrid) ** 2 + zgrid**tau
        k = np.argmin(pen, axis=1)
        lo = zgrid[np.arange(blk.size), np.maximum(k - 1, 0)]
        hi = zgrid[np.arange(blk.size), np.minimum(k + 1, 512)]
        z = _golden_min_arrays(
            lambda z: (blk - sqrt_r * z) ** 2 + z**tau, lo, hi
        )
        out[start : start + 4096] = blk * blk - ((blk - sqrt_r * z) ** 2 + z**tau)
    return out if out.shape != (1,) else out[0]


def _eval_gen_gaussian_location(s, params):
    r, tau = params["r"], params["tau"]
    s = np.asarray(s, dtype=float)
    s_clipped = np.maximum(s, 0.0)
    return s - np.abs(s_clipped ** (1.0 / tau) - r ** (1.0 / tau)) ** tau


_FAMILY_EVAL: dict[str, Callable] = {
    "idj": _eval_idj,
    "symmetric_idj": _eval_symmetric_idj,
    "hetero": _eval_hetero,
    "dilate": _eval_dilate,
    "conv_from_f": _eval_conv_from_f,
    "gen_gaussian_conv": _eval_gen_gaussian_conv,
    "gen_gaussian_location": _eval_gen_gaussian_location,
}


def alpha_family(family: str, **params) -> ExponentFunction:
    """Closed-form exponent function for a named mixture family.

    u-axis families: ``idj(r)``, ``symmetric_idj(r)``, ``hetero(r, sigma2)``,
    ``dilate(points= | interval= | linf=)``, ``conv_from_f(ts, fs)``,
    ``gen_gaussian_conv(r, tau)``.  The s-axis family
    ``gen_gaussian_location(r, tau)`` describes a non-Gaussian null.
    """
    if family in ("idj", "symmetric_idj"):
        r = _require_positive(params, "r")
        return ExponentFunction(
            axis="u", family=family, params={"r": r},
            convolutional=True, scale=math.sqrt(r) + 1.0,
        )
    if family == "hetero":
        r = _require_nonnegative(params, "r")
        sigma2 = _require_positive(params, "sigma2")
        return ExponentFunction(
            axis="u", family=family, params={"r": r, "sigma2": sigma2},
            convolutional=sigma2 >= 1.0, scale=math.sqrt(r) + math.sqrt(sigma2),
        )
    if family == "dilate":
        if "linf" in params:
            linf = params["linf"]
            if linf < 0:
                raise InvalidParameterError(f"linf must be >= 0, got {linf}")
            fam_params = {"points": (-float(linf), float(linf))}
            scale = float(linf) + 1.0
        elif "points" in params:
            pts = tuple(float(p) for p in params["points"])
            if not pts:
                raise InvalidParameterError("dilate needs a non-empty support")
            fam_params = {"points": pts}
            scale = max(abs(p) for p in pts) + 1.0
        elif "interval" in params:
            a, b = (float(v) for v in params["interval"])
            if not a < b:
                raise InvalidParameterError("dilate interval must satisfy a < b")
            fam_params = {"interval": (a, b)}
            scale = max(abs(a), abs(b)) + 1.0
        else:
            raise InvalidParameterError("dilate needs points=, interval= or linf=")
        return ExponentFunction(
            axis="u", family=family, params=fam_params,
            convolutional=True, scale=scale,
        )
    if family == "conv_from_f":
        ts = np.asarray(params["ts"], dtype=float)
        fs = np.asarray(params["fs"], dtype=float)
        if not np.any(np.isfinite(fs)):
            raise EmptySupportError("f is infinite everywhere")
        finite_ts = ts[np.isfinite(fs)]
        return ExponentFunction(
            axis="u", family=family, params={"ts": ts, "fs": fs},
            convolutional=True, scale=float(np.max(np.abs(finite_ts))) + 1.0,
        )
    if family == "gen_gaussian_conv":
        r = _require_positive(params, "r")
        tau = _require_positive(params, "tau")
        return ExponentFunction(
            axis="u", family=family, params={"r": r, "tau": tau},
            convolutional=True, scale=math.sqrt(r) * 2.0 ** (1.0 / tau) + 1.0,
        )
    if family == "gen_gaussian_location":
        r = _require_positive(params, "r")
        tau = _require_positive(params, "tau")
        return ExponentFunction(
            axis="s", family=family, params={"r": r, "tau": tau},
            convolutional=False, scale=r + 1.0,
        )
    raise InvalidParameterError(f"unknown exponent family {family!r}")


def gamma_from_alpha(alpha: ExponentFunction) -> ExponentFunction:
    """s-axis exponent gamma(s) = alpha(sqrt s) v alpha(-sqrt s)."""
    _require_axis(alpha, "u")
    lo, hi = alpha.domain()
    smax = max(hi, -lo) ** 2
    s = np.linspace(0.0, smax, GRID_POINTS)
    root = np.sqrt(s)
    vals = np.maximum(alpha.evaluate(root), alpha.evaluate(-root))
    out = ExponentFunction.from_grid(s, vals, axis="s")
    return out


def exponent_from_csv(path) -> ExponentFunction:
    """Load a sampled exponent function from two-column CSV.

    The header's first column names the axis ('u,value' or 's,value');
    the rows hold strictly increasing abscissae and values (-inf allowed
    to mark off-support regions).
    """
    xs, vals = [], []
    with open(path) as fh:
        header = fh.readline().strip()
        axis = header.split(",")[0].strip().lower()
        if axis not in ("u", "s"):
            raise InvalidParameterError(
                f"{path}: header must declare the axis as 'u,value' or 's,value'"
            )
        for line in fh:
            line = line.strip()
            if not line:
                continue
            x_str, v_str = line.split(",")[:2]
            xs.append(float(x_str))
            vals.append(float(v_str))
    if not xs:
        raise InvalidParameterError(f"{path}: no grid rows found")
    return ExponentFunction.from_grid(xs, vals, axis=axis)


# ---------------------------------------------------------------------------
# grid machinery
# ---------------------------------------------------------------------------


def ess_sup_grid(
    xs, values, refine: Optional[Callable] = None, tol: float = _REFINE_TOL
) -> tuple[float, float]:
    """(max value, argmax) over a grid; -inf entries are skipped.

    Ties break to the smallest abscissa.  When ``refine`` is given (a
    vectorized callable agreeing with ``values`` on the grid), a
    golden-section pass inside the winning cell sharpens the maximum.
    """
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.size == 0:
        raise EmptySupportError("empty grid")
    if np.all(np.isneginf(values)):
        raise EmptySupportError("all grid values are -inf")
    idx = int(np.argmax(values))  # first occurrence wins ties
    best_x, best_v = float(xs[idx]), float(values[idx])
    if refine is not None and np.isfinite(best_v):
        lo = float(xs[max(idx - 1, 0)])
        hi = float(xs[min(idx + 1, xs.size - 1)])
        x_ref, v_ref = _golden_max_scalar(refine, lo, hi, tol)
        if v_ref > best_v:
            best_x, best_v = x_ref, v_ref
    return best_v, best_x


def _golden_max_scalar(fn, lo: float, hi: float, tol: float = _REFINE_TOL):
    a, b = float(lo), float(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = float(fn(c)), float(fn(d))
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = float(fn(c))
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = float(fn(d))
    x = 0.5 * (a + b)
    return x, float(fn(x))


def _golden_min_arrays(fn, lo: np.ndarray, hi: np.ndarray, iters: int = 70):
    a = lo.astype(float).copy()
    b = hi.astype(float).copy()
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        left = fc <= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        fc, fd = fn(c), fn(d)
    return 0.5 * (a + b)


def laplace_log_integral(xs, values, big_m: float) -> float:
    """(1/M) log integral of exp(M f) over the grid, trapezoid weights.

    Stabilized with log-sum-exp; -inf values contribute nothing.  As M
    grows the result converges to the essential supremum of f, which is
    how admissibility of exponent functions is probed numerically.
    """
    if big_m <= 0:
        raise InvalidParameterError(f"M must be > 0, got {big_m}")
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.size < 2:
        raise EmptySupportError("laplace integral needs at least two grid points")
    dx = np.diff(xs)
    weights = np.zeros_like(xs)
    weights[:-1] += 0.5 * dx
    weights[1:] += 0.5 * dx
    with np.errstate(divide="ignore"):
        log_w = np.log(weights)
    total = logsumexp(big_m * values + log_w)
    return float(total) / big_m


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------


def check_admissible(
    alpha: ExponentFunction, grid_points: int = GRID_POINTS
) -> AdmissibilityReport:
    """Verify that an exponent function can arise from a mixture sequence.

    Three conditions: pointwise alpha(u) <= u^2; the normalized
    log-integral of exp(t (alpha - u^2)) decreasing toward 0 along a
    geometric ladder of t with final magnitude <= 0.05; and convexity
    when the function is flagged convolutional.
    """
    _require_axis(alpha, "u")
    xs, vals = alpha.grid(grid_points)
    violations = []

    margin = vals - xs * xs
    bad = margin > _ADMISSIBLE_SLACK
    if np.any(bad):
        worst = int(np.argmax(margin))
        violations.append(
            f"alpha(u) exceeds u^2 at {int(bad.sum())} grid points "
            f"(worst at u={xs[worst]:.6g}, excess {margin[worst]:.3g})"
        )

    ladder = tuple(laplace_log_integral(xs, margin, t) for t in _LADDER)
    mags = [abs(v) for v in ladder]
    # soft direction check: the magnitude may wobble early in the ladder
    # but must have come down by its end
    if mags[-1] > mags[0] + _ADMISSIBLE_SLACK:
        violations.append("normalized log-integral does not decrease toward 0")
    if mags[-1] > _LADDER_FINAL_TOL:
        violations.append(
            f"normalized log-integral at t={_LADDER[-1]:.0f} is {ladder[-1]:.4g}, "
            f"maximum allowed magnitude {_LADDER_FINAL_TOL}"
        )

    if alpha.convolutional:
        finite = np.isfinite(vals)
        if finite.sum() >= 3:
            v = vals[finite]
            second = v[2:] - 2.0 * v[1:-1] + v[:-2]
            if np.any(second < -_ADMISSIBLE_SLACK):
                violations.append("convolutional flag set but alpha is not convex")

    return AdmissibilityReport(
        admissible=not violations,
        violations=tuple(violations),
        ladder_values=ladder,
    )


def _require_axis(fn: ExponentFunction, axis: str) -> None:
    if fn.axis != axis:
        raise WrongParametrizationError(
            f"expected {axis}-axis exponent function, got {fn.axis}-axis"
        )


def _require_admissible(alpha: ExponentFunction, grid_points: int) -> None:
    report = check_admissible(alpha, grid_points)
    if not report.admissible:
        raise AdmissibilityError("; ".join(report.violations))


# ---------------------------------------------------------------------------
# boundaries from exponent functions
# ---------------------------------------------------------------------------


def beta_sharp(
    alpha: ExponentFunction, grid_points: int = GRID_POINTS
) -> BoundaryResult:
    """Detection boundary 1/2 + 0 v sup_u {alpha(u) - u^2 + (u^2 ^ 1)/2}."""
    _require_axis(alpha, "u")
    _require_admissible(alpha, grid_points)
    xs, vals = alpha.grid(grid_points)
    objective = vals - xs * xs + 0.5 * np.minimum(xs * xs, 1.0)
    refine = None
    if alpha.has_closed_form:
        refine = lambda u: alpha.evaluate(u) - u * u + 0.5 * min(u * u, 1.0)
    sup, arg = ess_sup_grid(xs, objective, refine)
    du = float(xs[1] - xs[0]) if xs.size > 1 else 0.0
    return BoundaryResult(
        beta=min(1.0, 0.5 + max(0.0, sup)),
        maximizer=arg,
        method="grid",
        grid_resolution=du,
    )


def beta_star_general(
    gamma: ExponentFunction, grid_points: int = GRID_POINTS
) -> BoundaryResult:
    """Boundary 1/2 + 0 v sup_{s>=0} {gamma(s) - s + (s ^ 1)/2} on the s-axis."""
    _require_axis(gamma, "s")
    xs, vals = gamma.grid(grid_points)
    margin = vals - xs
    if np.any(margin > _ADMISSIBLE_SLACK):
        worst = int(np.argmax(margin))
        raise AdmissibilityError(
            f"gamma(s) exceeds s at s={xs[worst]:.6g} by {margin[worst]:.3g}"
        )
    objective = vals - xs + 0.5 * np.minimum(xs, 1.0)
    refine = None
    if gamma.has_closed_form:
        refine = lambda s: gamma.evaluate(s) - s + 0.5 * min(s, 1.0)
    sup, arg = ess_sup_grid(xs, objective, refine)
    ds = float(xs[1] - xs[0]) if xs.size > 1 else 0.0
    return BoundaryResult(
        beta=min(1.0, 0.5 + max(0.0, sup)),
        maximizer=arg,
        method="grid",
        grid_resolution=ds,
    )


def hellinger_exponent(
    alpha: ExponentFunction, beta: float, grid_points: int = GRID_POINTS
) -> float:
    """Polynomial rate of the squared Hellinger distance at sparsity beta.

    sup_u { min(2(alpha - beta), alpha - beta) - u^2 }: the squared
    contamination rate applies where the likelihood exponent stays below
    beta, the simple rate above it.  Crosses -1 exactly at the boundary.
    """
    _require_axis(alpha, "u")
    if beta < 0.5:
        raise OutOfRegimeError(f"beta must be >= 1/2, got {beta}")
    _require_admissible(alpha, grid_points)
    xs, vals = alpha.grid(grid_points)
    gap = vals - beta
    objective = np.minimum(2.0 * gap, gap) - xs * xs
    refine = None
    if alpha.has_closed_form:

        def refine(u):
            g = alpha.evaluate(u) - beta
            return min(2.0 * g, g) - u * u

    sup, _ = ess_sup_grid(xs, objective, refine)
    return sup


def tail_exponent(
    alpha: ExponentFunction, u: float, grid_points: int = GRID_POINTS
) -> float:
    """sup over q >= u of alpha(q) - q^2; nonincreasing in u."""
    _require_axis(alpha, "u")
    if u < 0:
        raise InvalidParameterError(f"u must be >= 0, got {u}")
    xs, vals = alpha.grid(grid_points)
    mask = xs >= u
    candidates = []
    if np.any(mask):
        sub_xs, sub_vals = xs[mask], (vals - xs * xs)[mask]
        refine = None
        if alpha.has_closed_form:
            refine = lambda q: alpha.evaluate(max(q, u)) - max(q, u) ** 2
        sup, _ = ess_sup_grid(sub_xs, sub_vals, refine)
        candidates.append(sup)
    if alpha.has_closed_form:
        candidates.append(float(alpha.evaluate(u)) - u * u)
    if not candidates:
        raise EmptySupportError(f"grid does not reach q >= {u}")
    return max(candidates)


def hc_achievable_boundary(
    alpha: ExponentFunction,
    grid_points: int = GRID_POINTS,
    via_sweep: bool = False,
) -> BoundaryResult:
    """Boundary achieved by the higher-criticism test.

    Direct form: 1/2 + (1/2) sup_{q>=0} {2 alpha(q) - 2 q^2 + (q^2 ^ 1)},
    which must coincide with :func:`beta_sharp` (adaptivity).  The
    ``via_sweep`` flag instead sweeps exceedance levels s in (0, 1] and
    maximizes (1+s)/2 + sup_{q >= sqrt s} {alpha(q) - q^2}, the form in
    which each threshold's normalized exceedance count is analyzed.
    """
    _require_axis(alpha, "u")
    xs, vals = alpha.grid(grid_points)
    if not np.any(vals > 0):
        raise HCBoundaryUndefinedError("exponent function is nowhere positive")
    _require_admissible(alpha, grid_points)

    if via_sweep:
        mask = xs >= 0.0
        qs = xs[mask]
        tail = vals[mask] - qs * qs
        suffix = np.maximum.accumulate(tail[::-1])[::-1]  # sup over q >= qs[i]
        s_grid = np.linspace(1e-9, 1.0, 4001)
        pos = np.searchsorted(qs, np.sqrt(s_grid), side="left")
        pos = np.minimum(pos, qs.size - 1)
        objective = 0.5 * (1.0 + s_grid) + suffix[pos]
        sup, arg = ess_sup_grid(s_grid, objective)
        beta = sup
        maximizer = math.sqrt(arg)
    else:
        mask = xs >= 0.0
        qs = xs[mask]
        objective = 2.0 * vals[mask] - 2.0 * qs * qs + np.minimum(qs * qs, 1.0)
        refine = None
        if alpha.has_closed_form:
            refine = lambda q: (
                2.0 * alpha.evaluate(q) - 2.0 * q * q + min(q * q, 1.0)
            )
        sup, maximizer = ess_sup_grid(qs, objective, refine)
        beta = 0.5 + 0.5 * max(0.0, sup)

    du = float(xs[1] - xs[0]) if xs.size > 1 else 0.0
    return BoundaryResult(
        beta=min(1.0, max(0.5, beta)),
        maximizer=maximizer,
        method="grid",
        grid_resolution=du,
    )


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def beta_star_idj(x: float) -> float:
    """Classical location-model boundary as a function of signal strength."""
    if x <= 0.25:
        return 0.5 + max(x, 0.0)
    return 1.0 - max(0.0, 1.0 - math.sqrt(x)) ** 2


def _beta_star_idj_arr(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    low = 0.5 + np.maximum(x, 0.0)
    high = 1.0 - np.maximum(0.0, 1.0 - np.sqrt(np.maximum(x, 0.0))) ** 2
    return np.where(x <= 0.25, low, high)


def boundary_closed_form(family: str, mode: str = "beta-of-r", **params) -> float:
    """Exact piecewise boundary formulas, branch conditions as printed.

    Families: ``idj``; ``hetero`` (heteroscedastic normal, sigma2);
    ``dilate`` (signal support scaled, parameter linf); ``ggconv``
    (generalized Gaussian convolution, tau and r; exact bullets at
    tau = 1 and tau = 2, a deterministic 1-D supremum otherwise); and
    ``gglocation`` (generalized Gaussian location mixture, tau and r).
    ``mode="r-of-beta"`` inverts the idj and hetero formulas.
    """
    if mode not in ("beta-of-r", "r-of-beta"):
        raise InvalidParameterError(f"unknown mode {mode!r}")

    if family == "idj":
        if mode == "beta-of-r":
            r = _require_positive(params, "r")
            return 0.5 + r if r <= 0.25 else 1.0 - max(0.0, 1.0 - math.sqrt(r)) ** 2
        beta = _require_open_interval(params, "beta", 0.5, 1.0)
        return beta - 0.5 if beta <= 0.75 else (1.0 - math.sqrt(1.0 - beta)) ** 2

    if family == "hetero":
        sigma2 = _require_positive(params, "sigma2")
        if mode == "beta-of-r":
            r = _require_nonnegative(params, "r")
            if 2.0 * math.sqrt(r) + sigma2 <= 2.0:
                # at the corner r = 0, sigma2 = 2 the ratio is read as 0
                return 0.5 if r == 0.0 and sigma2 == 2.0 else 0.5 + r / (2.0 - sigma2)
            return 1.0 - max(0.0, 1.0 - math.sqrt(r)) ** 2 / sigma2
        beta = _require_open_interval(params, "beta", 0.5, 1.0)
        if sigma2 < 2.0 and beta <= 1.0 - sigma2 / 4.0:
            return (2.0 - sigma2) * (beta - 0.5)
        return max(0.0, 1.0 - math.sqrt(sigma2) * math.sqrt(1.0 - beta)) ** 2

    if family == "dilate":
        _require_mode_beta(mode, family)
        linf = _require_nonnegative(params, "linf")
        if linf <= 0.5:
            return linf * linf + 0.5
        return 1.0 - max(0.0, 1.0 - linf) ** 2

    if family == "ggconv":
        _require_mode_beta(mode, family)
        r = _require_positive(params, "r")
        tau = _require_positive(params, "tau")
        if tau == 1.0:
            if r > 1.5 + math.sqrt(2.0):
                return (1.0 - 0.5 / math.sqrt(r)) ** 2
            return 0.5
        if tau == 2.0:
            return max(0.5, r / (1.0 + r))
        # deterministic supremum of the classical boundary against the
        # polynomial tail cost: sup_{z >= 0} { beta_idj(r z^2) - z^tau }
        zmax = max(2.0, 2.0 / math.sqrt(r), 1.2 * 0.5 ** (1.0 / tau))
        zs = np.linspace(0.0, zmax, GRID_POINTS)
        obj = _beta_star_idj_arr(r * zs * zs) - zs**tau
        sup, _ = ess_sup_grid(
            zs, obj, refine=lambda z: beta_star_idj(r * z * z) - z**tau
        )
        return min(1.0, max(0.5, sup))

    if family == "gglocation":
        _require_mode_beta(mode, family)
        r = _require_positive(params, "r")
        tau = _require_positive(params, "tau")
        if r > 1.0:
            return 1.0
        if tau <= 1.0:
            return 0.5 * (1.0 + r)
        threshold = (1.0 - 2.0 ** (1.0 / (1.0 - tau))) ** tau
        if r < threshold:
            slope = (0.5 - 2.0 ** (tau / (1.0 - tau))) / threshold
            return 0.5 + slope * r
        return 1.0 - (1.0 - r ** (1.0 / tau)) ** tau

    raise InvalidParameterError(f"unknown boundary family {family!r}")


def beta_convolution(ts, fs, grid_points: int = GRID_POINTS) -> BoundaryResult:
    """Boundary of a convolution model from the signal-density exponent f.

    sup_t { beta_idj(t^2) - f(t) } over the declared grid, +inf entries
    marking off-support regions; golden refinement with linearly
    interpolated f when the winning cell has finite neighbors.  The
    result is clamped to [1/2, 1].
    """
    ts = np.asarray(ts, dtype=float)
    fs = np.asarray(fs, dtype=float)
    if ts.ndim != 1 or ts.shape != fs.shape or ts.size == 0:
        raise InvalidParameterError("ts and fs must be equal-length 1-D arrays")
    finite = np.isfinite(fs)
    if not np.any(finite):
        raise EmptySupportError("f is infinite everywhere")
    objective = np.where(finite, _beta_star_idj_arr(ts * ts) - fs, -np.inf)
    idx = int(np.argmax(objective))
    best_v, best_t = float(objective[idx]), float(ts[idx])
    lo_i, hi_i = max(idx - 1, 0), min(idx + 1, ts.size - 1)
    if finite[lo_i] and finite[hi_i] and hi_i > lo_i:
        f_lin = lambda t: float(np.interp(t, ts[finite], fs[finite]))
        t_ref, v_ref = _golden_max_scalar(
            lambda t: beta_star_idj(t * t) - f_lin(t), float(ts[lo_i]), float(ts[hi_i])
        )
        if v_ref > best_v:
            best_t, best_v = t_ref, v_ref
    dt = float(ts[1] - ts[0]) if ts.size > 1 else 0.0
    return BoundaryResult(
        beta=min(1.0, max(0.5, best_v)),
        maximizer=best_t,
        method="grid",
        grid_resolution=dt,
    )


# ---------------------------------------------------------------------------
# parameter validation helpers
# ---------------------------------------------------------------------------


def _require_positive(params: dict, name: str) -> float:
    val = params.get(name)
    if val is None or not (val > 0):
        raise InvalidParameterError(f"{name} must be > 0, got {val!r}")
    return float(val)


def _require_nonnegative(params: dict, name: str) -> float:
    val = params.get(name)
    if val is None or not (val >= 0):
        raise InvalidParameterError(f"{name} must be >= 0, got {val!r}")
    return float(val)


def _require_open_interval(params: dict, name: str, lo: float, hi: float) -> float:
    val = params.get(name)
    if val is None or not (lo < val < hi):
        raise InvalidParameterError(
            f"{name} must lie in ({lo}, {hi}), got {val!r}"
        )
    return float(val)


def _require_mode_beta(mode: str, family: str) -> None:
    if mode != "beta-of-r":
        raise InvalidParameterError(
            f"mode r-of-beta is not available for family {family!r}"
        )
