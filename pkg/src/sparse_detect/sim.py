"""Seeded Monte-Carlo harness for phase-diagram experiments.

Estimates Type-I plus Type-II error rates over (beta, r, n, test) grids,
attaches Wilson confidence half-widths and the theoretical boundary
overlay, and provides the finite-n exponent-estimation diagnostic.

Reproducibility: every replicate draws from a counter-based stream keyed
by (seed, cell index, replicate index, hypothesis bit), so results are
independent of scheduling and worker count, and CSV output is
byte-identical for a fixed seed.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import rng
from .boundary import boundary_closed_form
from .dists import (
    Distribution,
    Gaussian,
    GenGaussian,
    Shifted,
    SparseMixture,
    epsilon_from_beta,
    from_spec,
    log_likelihood_ratio,
    mu_from_r,
)
from .errors import ConfigError, InvalidParameterError
from .hctest import hc_statistic, hc_threshold, lr_test, max_test

__all__ = [
    "TESTS",
    "ExperimentConfig",
    "PhaseCell",
    "PhaseTable",
    "GammaDiagnostic",
    "family_mixture",
    "run_cell",
    "phase_sweep",
    "estimate_gamma",
    "estimate_gamma_family",
    "wilson_halfwidth",
]

TESTS = ("hc", "lr", "max")
SIM_FAMILIES = ("idj", "hetero", "gglocation", "custom")
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid specification for a phase sweep."""

    family: str
    beta_grid: tuple[float, ...]
    r_grid: tuple[float, ...]
    n_list: tuple[int, ...]
    replicates: int
    tests: tuple[str, ...]
    seed: int
    delta: float = 0.1
    family_params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "beta_grid", tuple(float(b) for b in self.beta_grid))
        object.__setattr__(self, "r_grid", tuple(float(r) for r in self.r_grid))
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "tests", tuple(self.tests))
        if self.family not in SIM_FAMILIES:
            raise ConfigError(
                f"family {self.family!r} is not simulatable; choose from {SIM_FAMILIES}"
            )
        if not self.beta_grid or not self.r_grid or not self.n_list:
            raise ConfigError("beta_grid, r_grid and n_list must be non-empty")
        if self.replicates < 1:
            raise ConfigError(f"replicates must be >= 1, got {self.replicates}")
        unknown = set(self.tests) - set(TESTS)
        if not self.tests or unknown:
            raise ConfigError(f"tests must be a non-empty subset of {TESTS}")
        if "hc" in self.tests and min(self.n_list) < 16:
            raise ConfigError("the hc test requires every n >= 16")
        if any(n < 2 for n in self.n_list):
            raise ConfigError("every n must be >= 2")
        if self.delta <= 0:
            raise ConfigError(f"delta must be > 0, got {self.delta}")

    def cells(self) -> list[tuple[int, float, float, int, str]]:
        """Deterministic cell order: beta, then r, then n, then test."""
        ordered_tests = [t for t in TESTS if t in self.tests]
        out = []
        index = 0
        for beta in sorted(self.beta_grid):
            for r in sorted(self.r_grid):
                for n in sorted(self.n_list):
                    for test in ordered_tests:
                        out.append((index, beta, r, n, test))
                        index += 1
        return out

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "family_params": dict(self.family_params),
            "beta_grid": list(self.beta_grid),
            "r_grid": list(self.r_grid),
            "n_list": list(self.n_list),
            "replicates": self.replicates,
            "tests": list(self.tests),
            "seed": self.seed,
            "delta": self.delta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return cls(
            family=data["family"],
            beta_grid=tuple(data["beta_grid"]),
            r_grid=tuple(data["r_grid"]),
            n_list=tuple(data["n_list"]),
            replicates=int(data["replicates"]),
            tests=tuple(data["tests"]),
            seed=int(data["seed"]),
            delta=float(data.get("delta", 0.1)),
            family_params=dict(data.get("family_params", {})),
        )

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass(frozen=True)
class PhaseCell:
    """Monte-Carlo error estimate for one (beta, r, n, test) cell."""

    beta: float
    r: float
    n: int
    test: str
    type1_rate: float
    type2_rate: float
    total_error: float
    wilson_ci_halfwidth: float
    replicates: int
    seed: int


def wilson_halfwidth(successes: int, trials: int, z: float = _Z95) -> float:
    """Half-width of the Wilson score interval; stable near rates 0 and 1."""
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    k, m = float(successes), float(trials)
    return z * math.sqrt(k * (m - k) / m + z * z / 4.0) / (m + z * z)


def family_mixture(
    family: str, family_params: dict, r: float, beta: float, n: int
) -> SparseMixture:
    """Concrete testing problem for a cell; the shift is recomputed per n."""
    eps = epsilon_from_beta(n, beta)
    if family == "idj":
        return SparseMixture(Gaussian(), Gaussian(mu_from_r(n, r), 1.0), eps)
    if family == "hetero":
        sigma2 = float(family_params.get("sigma2", 1.0))
        if sigma2 <= 0:
            raise InvalidParameterError(f"sigma2 must be > 0, got {sigma2}")
        return SparseMixture(
            Gaussian(), Gaussian(mu_from_r(n, r), math.sqrt(sigma2)), eps
        )
    if family == "gglocation":
        tau = float(family_params.get("tau", 1.0))
        if tau <= 0:
            raise InvalidParameterError(f"tau must be > 0, got {tau}")
        null = GenGaussian(tau)
        shift = (r * math.log(n)) ** (1.0 / tau)
        return SparseMixture(null, Shifted(null, shift), eps)
    if family == "custom":
        # fixed null/alternative pair given as JSON specs; r is unused and
        # the alternative does not rescale with n
        null = from_spec(family_params["null"])
        alt = from_spec(family_params["alt"])
        if not isinstance(null, Distribution) or not isinstance(alt, Distribution):
            raise InvalidParameterError("custom null/alt must be plain distributions")
        return SparseMixture(null, alt, eps)
    raise InvalidParameterError(f"family {family!r} is not simulatable")


def _overlay_beta_star(family: str, family_params: dict, r: float) -> float:
    if family == "idj":
        return boundary_closed_form("idj", r=r) if r > 0 else 0.5
    if family == "hetero":
        return boundary_closed_form(
            "hetero", r=r, sigma2=float(family_params.get("sigma2", 1.0))
        )
    if family == "gglocation":
        tau = float(family_params.get("tau", 1.0))
        return boundary_closed_form("gglocation", tau=tau, r=r) if r > 0 else 0.5
    if family == "custom":
        return math.nan
    raise InvalidParameterError(f"family {family!r} has no overlay")


def _rejects(test: str, ys: np.ndarray, mix: SparseMixture, threshold: float) -> bool:
    if test == "hc":
        statistic, _ = hc_statistic(ys, mix.null_dist)
        return statistic > threshold
    if test == "lr":
        _, decision = lr_test(ys, mix)
        return decision == "alternative"
    if test == "max":
        return max_test(ys, u=1.0) == "alternative"
    raise InvalidParameterError(f"unknown test {test!r}")


def run_cell(cfg: ExperimentConfig, cell: tuple[int, float, float, int, str]) -> PhaseCell:
    """Estimate both error rates for a single grid cell.

    Replicate k under hypothesis h draws from the stream keyed by
    (seed, cell index, k, h); the result is a pure function of the
    configuration and the cell.
    """
    index, beta, r, n, test = cell
    mix = family_mixture(cfg.family, cfg.family_params, r, beta, n)
    mixed = mix.mixed()
    threshold = hc_threshold(n, cfg.delta) if test == "hc" else math.nan
    false_alarms = 0
    misses = 0
    for rep in range(cfg.replicates):
        null_sample = mix.null_dist.sample(n, rng.stream(cfg.seed, index, rep, 0))
        if _rejects(test, null_sample, mix, threshold):
            false_alarms += 1
        alt_sample = mixed.sample(n, rng.stream(cfg.seed, index, rep, 1))
        if not _rejects(test, alt_sample, mix, threshold):
            misses += 1
    m = cfg.replicates
    type1 = false_alarms / m
    type2 = misses / m
    halfwidth = wilson_halfwidth(false_alarms, m) + wilson_halfwidth(misses, m)
    return PhaseCell(
        beta=beta,
        r=r,
        n=n,
        test=test,
        type1_rate=type1,
        type2_rate=type2,
        total_error=type1 + type2,
        wilson_ci_halfwidth=halfwidth,
        replicates=m,
        seed=cfg.seed,
    )


def _run_cell_star(args) -> PhaseCell:
    return run_cell(*args)


@dataclass(frozen=True)
class PhaseTable:
    """Sweep result: one PhaseCell per grid cell plus the overlay column."""

    config: ExperimentConfig
    cells: tuple[PhaseCell, ...]
    beta_star: tuple[float, ...]
    wall_time_s: float = 0.0
    worker_count: int = 1

    CSV_HEADER = (
        "beta,r,n,test,type1_rate,type2_rate,total_error,"
        "wilson_ci_halfwidth,replicates,seed,beta_star"
    )

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(self.CSV_HEADER + "\n")
        for cell, overlay in zip(self.cells, self.beta_star):
            buf.write(
                f"{cell.beta!r},{cell.r!r},{cell.n},{cell.test},"
                f"{cell.type1_rate!r},{cell.type2_rate!r},{cell.total_error!r},"
                f"{cell.wilson_ci_halfwidth!r},{cell.replicates},{cell.seed},"
                f"{overlay!r}\n"
            )
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    def manifest(self) -> dict:
        return {
            "seed": self.config.seed,
            "config_hash": self.config.config_hash(),
            "wall_time_s": self.wall_time_s,
            "worker_count": self.worker_count,
        }

    def write_manifest(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.manifest(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def overlay_csv(self) -> str:
        """Two-column (r, beta_star) plot data for the boundary curve."""
        seen = {}
        for cell, overlay in zip(self.cells, self.beta_star):
            seen.setdefault(cell.r, overlay)
        buf = io.StringIO()
        buf.write("r,beta_star\n")
        for r in sorted(seen):
            buf.write(f"{r!r},{seen[r]!r}\n")
        return buf.getvalue()

    def write_overlay_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.overlay_csv())

    def select(self, **criteria) -> list[PhaseCell]:
        """Cells matching the given field values exactly."""
        out = []
        for cell in self.cells:
            if all(getattr(cell, k) == v for k, v in criteria.items()):
                out.append(cell)
        return out


def phase_sweep(cfg: ExperimentConfig, workers: int = 1) -> PhaseTable:
    """Run every grid cell; aggregation is a deterministic fold in cell order."""
    cells = cfg.cells()
    start = time.perf_counter()
    if workers <= 1 or len(cells) <= 1:
        results = [run_cell(cfg, cell) for cell in cells]
        used = 1
    else:
        used = min(workers, len(cells))
        with ProcessPoolExecutor(max_workers=used) as pool:
            results = list(pool.map(_run_cell_star, [(cfg, c) for c in cells]))
    wall = time.perf_counter() - start
    overlay = tuple(
        _overlay_beta_star(cfg.family, cfg.family_params, cell[2]) for cell in cells
    )
    return PhaseTable(
        config=cfg,
        cells=tuple(results),
        beta_star=overlay,
        wall_time_s=wall,
        worker_count=used,
    )


# ---------------------------------------------------------------------------
# finite-n exponent estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaDiagnostic:
    """Normalized log-likelihood ratios at null tail quantiles, per n and s.

    ratios[i, j] is max(l(z(n^-s)), l(z(1 - n^-s))) / ln n at n = n_list[i],
    s = s_grid[j].  flags lists the (n_from, n_to, s, delta) quadruples
    where consecutive sample sizes moved by more than 0.05, the
    non-convergence diagnostic.
    """

    n_list: tuple[int, ...]
    s_grid: tuple[float, ...]
    ratios: np.ndarray
    flags: tuple[tuple[int, int, float, float], ...]

    @property
    def converged(self) -> bool:
        return not self.flags

    def deviation_from(self, target, n: int) -> float:
        """Largest |ratio - target(s)| over the s grid at sample size n."""
        i = self.n_list.index(n)
        targets = np.array([target(s) for s in self.s_grid])
        return float(np.max(np.abs(self.ratios[i] - targets)))


def _gamma_ratio_row(
    q: Distribution, g: Distribution, n: int, s_grid: tuple[float, ...]
) -> np.ndarray:
    log_n = math.log(n)
    row = np.empty(len(s_grid))
    for j, s in enumerate(s_grid):
        p = float(n) ** (-s)
        if 1.0 - p == 1.0:
            raise InvalidParameterError(
                f"n^-s = {p:.3g} underflows the quantile resolution at n={n}, s={s}"
            )
        lower = q.quantile(p)
        upper = q.quantile(1.0 - p)
        val = max(
            float(log_likelihood_ratio(g, q, lower)),
            float(log_likelihood_ratio(g, q, upper)),
        )
        row[j] = val / log_n
    return row


def _validate_gamma_grids(n_list, s_grid) -> tuple[tuple[int, ...], tuple[float, ...]]:
    n_list = tuple(int(n) for n in n_list)
    s_grid = tuple(float(s) for s in s_grid)
    if not n_list or min(n_list) < 2:
        raise InvalidParameterError("n_list must be non-empty with every n >= 2")
    if not s_grid:
        raise InvalidParameterError("s_grid must be non-empty")
    s_floor = 1.0 / math.log2(min(n_list))
    if min(s_grid) < s_floor - 1e-12:
        raise InvalidParameterError(
            f"s_grid must start at or above 1/log2(min n) = {s_floor:.6g}"
        )
    return n_list, s_grid


def _flag_rows(
    n_list: tuple[int, ...],
    s_grid: tuple[float, ...],
    ratios: np.ndarray,
    threshold: float,
) -> tuple:
    flags = []
    for i in range(1, len(n_list)):
        deltas = np.abs(ratios[i] - ratios[i - 1])
        for j, s in enumerate(s_grid):
            if deltas[j] > threshold:
                flags.append((n_list[i - 1], n_list[i], s, float(deltas[j])))
    return tuple(flags)


def estimate_gamma(
    q: Distribution,
    g: Distribution,
    n_list: Sequence[int],
    s_grid: Iterable[float],
    flag_threshold: float = 0.05,
) -> GammaDiagnostic:
    """Evaluate the normalized log-likelihood ratio at null tail quantiles.

    For each n and s, the ratio is the larger of the log-likelihood
    ratios at the null lower and upper n^-s quantiles, divided by ln n.
    Its large-n limit is the s-axis exponent function of the pair (q, g).
    """
    n_list, s_grid = _validate_gamma_grids(n_list, s_grid)
    ratios = np.empty((len(n_list), len(s_grid)))
    for i, n in enumerate(n_list):
        ratios[i] = _gamma_ratio_row(q, g, n, s_grid)
    return GammaDiagnostic(
        n_list=n_list,
        s_grid=s_grid,
        ratios=ratios,
        flags=_flag_rows(n_list, s_grid, ratios, flag_threshold),
    )


def estimate_gamma_family(
    family: str,
    family_params: dict,
    r: float,
    n_list: Sequence[int],
    s_grid: Iterable[float],
    flag_threshold: float = 0.05,
) -> GammaDiagnostic:
    """Per-n diagnostic for a named family, rescaling the signal with n.

    Unlike :func:`estimate_gamma`, the alternative is rebuilt for every
    sample size (triangular-array semantics), which is the form in which
    family exponents converge.
    """
    n_list, s_grid = _validate_gamma_grids(n_list, s_grid)
    ratios = np.empty((len(n_list), len(s_grid)))
    for i, n in enumerate(n_list):
        mix = family_mixture(family, family_params, r, 0.5, n)
        ratios[i] = _gamma_ratio_row(mix.null_dist, mix.alt_dist, n, s_grid)
    return GammaDiagnostic(
        n_list=n_list,
        s_grid=s_grid,
        ratios=ratios,
        flags=_flag_rows(n_list, s_grid, ratios, flag_threshold),
    )
