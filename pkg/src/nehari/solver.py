"""Projected-descent minimization of the energy on the two Nehari branches.

Each iterate is kept exactly on the manifold by the fibering projection
(the one-dimensional scaling root), so the method is plain descent in the
tangential direction with a backtracking line search that re-projects every
trial point.  On the manifold the gradient is automatically orthogonal to
the ray direction, vanishing tangential residual forces the Lagrange
multiplier to vanish as well (the second ray derivative is nonzero on both
branches), and the stopping test asserts the full, unprojected gradient
norm.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .energy import ProblemConfig, dual_norm, energy, energy_gradient, nehari_residual
from .errors import ProjectionError, SeedingError, SolverError
from .fibering import NehariPoint, classify, project_scale, ray_energy_dt2
from .grid import Field, inner, random_smooth_field
from .thresholds import ADMISSIBLE, INADMISSIBLE, ThresholdReport, admissibility

logger = logging.getLogger(__name__)

__all__ = [
    "SolveReport",
    "SolvePair",
    "MultistartReport",
    "seed_field",
    "minimize_branch",
    "solve_both",
    "multistart",
]

ARMIJO = 1e-4
SHRINK = 0.5
ALPHA_MIN = 1e-20
MAX_RESTARTS = 3
ENERGY_SLACK = 1e-14


@dataclass(frozen=True)
class SolveReport:
    branch: str
    point: NehariPoint
    iterations: int
    restarts: int
    converged: bool
    energy_history: tuple[float, ...]
    residual_history: tuple[float, ...]
    invariants: dict
    wall_time: float

    def as_dict(self) -> dict:
        # wall_time deliberately omitted: reports must be byte-identical
        # across reruns with the same config and seed
        return {
            "branch": self.branch,
            "point": self.point.as_dict(),
            "iterations": self.iterations,
            "restarts": self.restarts,
            "converged": self.converged,
            "energy_history": list(self.energy_history),
            "residual_history": list(self.residual_history),
            "invariants": dict(self.invariants),
        }


@dataclass(frozen=True)
class SolvePair:
    """Both branch results; a failed branch carries its error text instead."""

    minus: Optional[SolveReport]
    plus: Optional[SolveReport]
    failures: dict
    ordering_ok: Optional[bool]

    def as_dict(self) -> dict:
        return {
            "minus": self.minus.as_dict() if self.minus else None,
            "plus": self.plus.as_dict() if self.plus else None,
            "failures": dict(self.failures),
            "ordering_ok": self.ordering_ok,
        }


@dataclass(frozen=True)
class MultistartReport:
    branch: str
    energies: tuple[float, ...]
    spread: float
    distinct_minimizers: bool

    def as_dict(self) -> dict:
        return {
            "branch": self.branch,
            "energies": list(self.energies),
            "spread": self.spread,
            "distinct_minimizers": self.distinct_minimizers,
        }


def _gaussian_bump(cfg: ProblemConfig, center_index: tuple[int, ...], sigma: float) -> Field:
    grid = cfg.grid
    coords = grid.coords()
    center = [grid.axis_coords(k)[center_index[k]] for k in range(grid.dim)]
    r2 = np.zeros(grid.shape)
    for c, x in zip(center, coords):
        r2 = r2 + (x - c) ** 2
    return Field(grid, np.exp(-r2 / sigma**2))


def _branch_available(diag, branch: str) -> bool:
    want = 1 if branch == "plus" else -1
    return any(sign == want for _, sign in diag.roots)


def seed_field(cfg: ProblemConfig, branch: str, sigma: float | None = None) -> Field:
    """Smooth bump concentrated where the branch-relevant weight peaks.

    The rising branch needs a positive concave integral, so the bump sits at
    the maximizer of a; the falling branch needs a positive convex integral
    and uses b.  If the classification does not admit the requested
    projection the bump is narrowed (width halved, up to 6 times).  Ties in
    the weight maximum break to the lowest lexicographic node index.
    """
    weight = cfg.a if branch == "plus" else cfg.b
    if not (np.any(weight.values > 0)):
        raise SeedingError(
            f"branch {branch!r} unreachable: its weight field has no positive values"
        )
    flat_index = int(np.argmax(weight.values))  # first max in C order
    center = np.unravel_index(flat_index, cfg.grid.shape)
    if sigma is None:
        sigma = min(cfg.grid.lengths) / 4.0
    last_diag = None
    for _ in range(7):
        candidate = _gaussian_bump(cfg, center, sigma)
        diag = classify(candidate, cfg)
        if _branch_available(diag, branch):
            return candidate
        last_diag = diag
        sigma /= 2.0
    raise SeedingError(
        f"no admissible seed for branch {branch!r} after narrowing", diagnosis=last_diag
    )


def _descent_state(u: Field, cfg: ProblemConfig):
    """Gradient data at an on-manifold iterate."""
    grid = cfg.grid
    grad_arr = energy_gradient(u, cfg)
    g = grad_arr / grid.cell_volume  # pointwise (L²-representative) gradient
    full_res = dual_norm(grad_arr, grid)
    gu = inner(grid, g, u.values)
    uu = inner(grid, u.values, u.values)
    d = -(g - (gu / uu) * u.values)
    tan_res = math.sqrt(max(inner(grid, d, d), 0.0))
    slope = inner(grid, g, d)  # directional derivative of J along d
    return g, d, slope, tan_res, full_res


def minimize_branch(
    cfg: ProblemConfig,
    branch: str,
    seed: Field | None = None,
    thresholds: ThresholdReport | None = None,
    force: bool = False,
) -> SolveReport:
    """Minimize the energy over one Nehari branch by projected descent.

    Stops when both the tangential and the full gradient dual norms fall
    below the configured residual tolerance.  Projection loss mid-run
    restarts from a narrowed seed at most three times.
    """
    t_start = time.perf_counter()
    if thresholds is not None and not force:
        verdict = admissibility(cfg.lam, thresholds)
        if verdict == INADMISSIBLE:
            raise SolverError(
                f"lambda {cfg.lam:g} is inadmissible (lambda0 {thresholds.lambda0:g}); "
                "pass force=True to run anyway"
            )
        if verdict != ADMISSIBLE:
            logger.warning(
                "lambda %g is %s (lambda0 %g): branch guarantees may fail",
                cfg.lam,
                verdict,
                thresholds.lambda0,
            )

    sigma0 = min(cfg.grid.lengths) / 4.0
    restarts = 0
    last_error: Exception | None = None
    while restarts <= MAX_RESTARTS:
        if restarts == 0 and seed is not None:
            start = seed
        else:
            start = seed_field(cfg, branch, sigma=sigma0 / (2.0**restarts))
        try:
            report = _run_descent(cfg, branch, start, thresholds, restarts, t_start)
            return report
        except ProjectionError as err:
            logger.info("branch %s: projection loss (%s); restarting", branch, err)
            last_error = err
            restarts += 1
    raise SolverError(
        f"branch {branch!r}: projection lost after {MAX_RESTARTS} restarts: {last_error}"
    )


def _run_descent(
    cfg: ProblemConfig,
    branch: str,
    start: Field,
    thresholds: ThresholdReport | None,
    restarts: int,
    t_start: float,
) -> SolveReport:
    u, t_star = project_scale(start, cfg, branch)
    energy_history = [energy(u, cfg)]
    residual_history: list[float] = []
    max_constraint = abs(nehari_residual(u, cfg))
    monotone = True
    converged = False
    iterations = 0
    prev_u: np.ndarray | None = None
    prev_g: np.ndarray | None = None

    for iterations in range(1, cfg.max_iter + 1):
        g, d, slope, tan_res, full_res = _descent_state(u, cfg)
        residual_history.append(tan_res)
        max_constraint = max(max_constraint, abs(inner(cfg.grid, g, u.values)))
        if tan_res <= cfg.residual_tol and full_res <= cfg.residual_tol:
            converged = True
            break
        current = energy_history[-1]
        slack = ENERGY_SLACK * (1.0 + abs(current))
        # decreases smaller than this drown in evaluation rounding of J
        vis_floor = 0.5 * np.finfo(float).eps * (1.0 + abs(current))

        # Barzilai-Borwein warm start for the backtracking search, capped at
        # the nominal unit step; Armijo acceptance below keeps monotonicity.
        alpha = 1.0
        if prev_u is not None:
            du = u.values - prev_u
            dg = g - prev_g
            denom = inner(cfg.grid, du, dg)
            if denom > 0.0:
                alpha = min(1.0, inner(cfg.grid, du, du) / denom)
                alpha = max(alpha, ALPHA_MIN)
        prev_u, prev_g = u.values, g

        accepted = None
        while alpha >= ALPHA_MIN:
            trial_values = u.values + alpha * d
            try:
                trial_u, trial_scale = project_scale(
                    Field(cfg.grid, trial_values), cfg, branch
                )
            except ProjectionError:
                alpha *= SHRINK
                continue
            trial_energy = energy(trial_u, cfg)
            decrease_needed = -ARMIJO * alpha * slope
            if trial_energy <= current - decrease_needed:
                accepted = (trial_u, trial_energy, trial_scale)
                break
            if decrease_needed < vis_floor and trial_energy <= current + slack:
                # rounding plateau: the certified decrease is unmeasurable,
                # but the step is non-increasing within evaluation noise
                accepted = (trial_u, trial_energy, trial_scale)
                break
            alpha *= SHRINK
        if accepted is None:
            # no decrease available along the tangential direction
            if full_res <= cfg.residual_tol and tan_res <= cfg.residual_tol:
                converged = True
            break
        u, new_energy, t_star = accepted
        if new_energy > energy_history[-1] + slack:
            monotone = False
        energy_history.append(new_energy)

    if not residual_history:
        g, d, slope, tan_res, full_res = _descent_state(u, cfg)
        residual_history.append(tan_res)
        converged = tan_res <= cfg.residual_tol and full_res <= cfg.residual_tol

    point = NehariPoint(
        field=u,
        branch=branch,
        energy=energy_history[-1],
        constraint=abs(nehari_residual(u, cfg)),
        gamma2=ray_energy_dt2(u, 1.0, cfg),
        scale=t_star,
    )
    final_grad = energy_gradient(u, cfg)
    final_full = dual_norm(final_grad, cfg.grid)
    invariants = {
        "monotone_energy": monotone,
        "max_constraint_residual": max_constraint,
        "final_full_residual": final_full,
        "final_energy": point.energy,
        "energy_sign_ok": (point.energy < 0.0)
        if branch == "plus"
        else (point.energy > 0.0),
        "gamma2_sign_ok": (point.gamma2 > 0.0)
        if branch == "plus"
        else (point.gamma2 < 0.0),
    }
    if thresholds is not None and branch == "minus":
        floor = thresholds.delta_lambda(cfg.lam)
        invariants["delta_lambda_floor"] = floor
        invariants["delta_lambda_bound_ok"] = point.energy >= floor - 1e-9
    if not converged:
        logger.warning(
            "branch %s stopped after %d iterations with residual %.3e (tol %.1e)",
            branch,
            iterations,
            residual_history[-1],
            cfg.residual_tol,
        )
    wall = time.perf_counter() - t_start
    logger.info(
        "branch %s: %d iterations, energy %.6e, residual %.3e, %.2fs",
        branch,
        iterations,
        point.energy,
        residual_history[-1],
        wall,
    )
    return SolveReport(
        branch=branch,
        point=point,
        iterations=iterations,
        restarts=restarts,
        converged=converged,
        energy_history=tuple(energy_history),
        residual_history=tuple(residual_history),
        invariants=invariants,
        wall_time=wall,
    )


def solve_both(
    cfg: ProblemConfig,
    thresholds: ThresholdReport | None = None,
    force: bool = False,
) -> SolvePair:
    """Run both branches and check the sign ordering of the two energies.

    The rising-branch minimizer is the negative-energy ground state; the
    falling-branch minimizer has positive energy.  A failing branch is
    reported, not raised, so the other branch's result survives.
    """
    reports: dict[str, Optional[SolveReport]] = {"minus": None, "plus": None}
    failures: dict[str, str] = {}
    for branch in ("minus", "plus"):
        try:
            reports[branch] = minimize_branch(
                cfg, branch, thresholds=thresholds, force=force
            )
        except (SolverError, SeedingError, ProjectionError) as err:
            failures[branch] = str(err)
            diag = getattr(err, "diagnosis", None)
            if diag is not None:
                failures[branch + "_diagnosis"] = diag.as_dict()
    ordering: Optional[bool] = None
    if reports["minus"] and reports["plus"]:
        ordering = (
            reports["plus"].point.energy < 0.0 < reports["minus"].point.energy
            and reports["plus"].point.energy < reports["minus"].point.energy
        )
    return SolvePair(
        minus=reports["minus"],
        plus=reports["plus"],
        failures=failures,
        ordering_ok=ordering,
    )


def multistart(
    cfg: ProblemConfig,
    branch: str,
    n_starts: int = 5,
    seed: int = 0,
    thresholds: ThresholdReport | None = None,
    rel_tol: float = 1e-6,
) -> MultistartReport:
    """Consistency check: perturbed seeds should reach the same energy.

    A spread above ``rel_tol`` flags distinct local minimizers instead of
    failing, since the theory guarantees existence, not uniqueness.
    """
    rng = np.random.default_rng(seed)
    base = seed_field(cfg, branch)
    energies = []
    for k in range(n_starts):
        if k == 0:
            start = base
        else:
            bump = random_smooth_field(cfg.grid, rng, max_mode=2)
            scale = 0.2 * float(np.max(np.abs(base.values)))
            scale /= max(float(np.max(np.abs(bump.values))), 1e-30)
            start = Field(cfg.grid, base.values + scale * bump.values)
        report = minimize_branch(cfg, branch, seed=start, thresholds=thresholds)
        energies.append(report.point.energy)
    lo, hi = min(energies), max(energies)
    spread = (hi - lo) / max(abs(lo), abs(hi), 1e-30)
    return MultistartReport(
        branch=branch,
        energies=tuple(energies),
        spread=spread,
        distinct_minimizers=spread > rel_tol,
    )
