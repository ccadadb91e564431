"""One-dimensional analysis along rays t ↦ t·u and Nehari projection.

For a fixed nonzero field u, the ray energy γ(t) = J(t·u) is controlled by
three scalar integrals: the concave weighted integral A = ∫a|u|^{q+1}, the
convex one B = ∫b|u|^{p+1}, and the energy integral ∫(u²+|∇u|²).  Scalings
placing t·u on the Nehari manifold are exactly the crossings of the balance
curve

    m(t) = t^{1-q} ∫ φ((u²+|∇u|²)t²/2)(u²+|∇u|²) − t^{p-q} B

with the level λ·A, since γ'(t) = t^q (m(t) − λA).  The balance curve is
strictly increasing when B ≤ 0 and unimodal when B > 0; its unique peak is
located through the strictly decreasing peak equation (η below).  This
module classifies every sign case, finds all roots by certified bisection,
and projects fields onto the chosen branch.

Root brackets are grown geometrically from [1/2, 2] (factor 2, capped at
[1e-9, 1e9]); bisection inside a bracket is the only refinement used, since
monotonicity makes it certified.  Reported scalar integrals go through the
exact compensated quadrature; the bisection loop itself uses a plain
deterministic vector sum for speed (the bracket tolerance, not summation
error, limits root accuracy).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .energy import (
    ProblemConfig,
    concave_integral,
    convex_integral,
    energy,
    nehari_residual,
)
from .errors import BracketError, DomainError, ProjectionError
from .grid import Field, integrate, pointwise_energy
from .phi import PhiModel

__all__ = [
    "FiberingDiagnosis",
    "NehariPoint",
    "CASE_NEITHER",
    "CASE_CONCAVE_ONLY",
    "CASE_CONVEX_ONLY",
    "CASE_BOTH_NO_ROOT",
    "CASE_BOTH_TANGENT",
    "CASE_BOTH_TWO_ROOTS",
    "ray_energy",
    "ray_energy_dt",
    "ray_energy_dt2",
    "ray_balance",
    "ray_balance_dt",
    "peak_equation",
    "peak_equation_dt",
    "bare_ray_energy",
    "bare_ray_peak",
    "balance_peak",
    "classify",
    "project",
    "project_scale",
    "sample_ray",
]

BRACKET_LO_CAP = 1e-9
BRACKET_HI_CAP = 1e9
BRACKET_GROW = 2.0
TANGENT_RTOL = 1e-10
BISECT_RTOL = 1e-13

CASE_NEITHER = "neither_positive"
CASE_CONCAVE_ONLY = "concave_only"
CASE_CONVEX_ONLY = "convex_only"
CASE_BOTH_NO_ROOT = "both_positive_no_root"
CASE_BOTH_TANGENT = "both_positive_tangent"
CASE_BOTH_TWO_ROOTS = "both_positive_two_roots"


class _RayData:
    """Per-field quantities reused across t: density array and integrals."""

    def __init__(self, u: Field, cfg: ProblemConfig):
        if u.grid != cfg.grid:
            raise DomainError("field lives on a different grid than the problem")
        self.cfg = cfg
        self.phi: PhiModel = cfg.phi
        self.vol = cfg.grid.cell_volume
        self.density = pointwise_energy(u)
        self.energy_int = integrate(cfg.grid, self.density)
        if self.energy_int <= 0.0:
            raise DomainError("ray analysis needs a nonzero field")
        self.density2 = self.density**2
        au = cfg.a.values * np.abs(u.values) ** (cfg.q + 1.0)
        bu = cfg.b.values * np.abs(u.values) ** (cfg.p + 1.0)
        self.concave = integrate(cfg.grid, au)
        self.convex = integrate(cfg.grid, bu)
        self.q = cfg.q
        self.p = cfg.p
        self.lam = cfg.lam

    def normalized(self) -> tuple["_RayData", float]:
        """Unit-energy copy (ray-invariant rescaling) and the scale used."""
        s = math.sqrt(self.energy_int)
        clone = object.__new__(_RayData)
        clone.cfg = self.cfg
        clone.phi = self.phi
        clone.vol = self.vol
        clone.density = self.density / (s * s)
        clone.density2 = clone.density**2
        clone.energy_int = 1.0
        clone.concave = self.concave / s ** (self.q + 1.0)
        clone.convex = self.convex / s ** (self.p + 1.0)
        clone.q = self.q
        clone.p = self.p
        clone.lam = self.lam
        return clone, s

    # plain deterministic sums: bracket width, not rounding, limits accuracy
    def moment0(self, t: float) -> float:
        arg = self.density * (t * t / 2.0)
        return self.vol * float(np.sum(self.phi.raw_phi(arg) * self.density))

    def moment1(self, t: float) -> float:
        arg = self.density * (t * t / 2.0)
        return self.vol * float(np.sum(self.phi.raw_dphi(arg) * self.density2))

    def moment01(self, t: float) -> tuple[float, float]:
        arg = self.density * (t * t / 2.0)
        return (
            self.vol * float(np.sum(self.phi.raw_phi(arg) * self.density)),
            self.vol * float(np.sum(self.phi.raw_dphi(arg) * self.density2)),
        )

    def moment2(self, t: float) -> float:
        arg = self.density * (t * t / 2.0)
        return self.vol * float(
            np.sum(self.phi.raw_d2phi(arg) * self.density2 * self.density)
        )

    def bulk(self, t: float) -> float:
        arg = self.density * (t * t / 2.0)
        return self.vol * float(np.sum(self.phi.raw_Phi(arg)))

    def balance(self, t: float) -> float:
        return t ** (1.0 - self.q) * self.moment0(t) - t ** (self.p - self.q) * self.convex

    def balance_dt(self, t: float) -> float:
        m0, m1 = self.moment01(t)
        return (
            (1.0 - self.q) * t**-self.q * m0
            + t ** (2.0 - self.q) * m1
            - (self.p - self.q) * t ** (self.p - self.q - 1.0) * self.convex
        )

    def peak_eq(self, t: float) -> float:
        m0, m1 = self.moment01(t)
        return t ** (1.0 - self.p) * ((1.0 - self.q) * m0 + t * t * m1)

    def bare_slope_over_t(self, t: float) -> float:
        """h'(t)/t; positive for small t, negative for large t when B > 0."""
        return self.moment0(t) - t ** (self.p - 1.0) * self.convex

    def bare(self, t: float) -> float:
        return self.bulk(t) - t ** (self.p + 1.0) / (self.p + 1.0) * self.convex


def _check_t(t: float) -> float:
    t = float(t)
    if t <= 0.0:
        raise DomainError(f"ray derivative functions need t > 0, got {t}")
    return t


# -- public ray functions (input units, exact quadrature) --------------------


def ray_energy(u: Field, t: float, cfg: ProblemConfig) -> float:
    """γ(t) = J(t·u); defined for t >= 0 with γ(0) = 0."""
    t = float(t)
    if t < 0.0:
        raise DomainError(f"ray energy needs t >= 0, got {t}")
    dens = pointwise_energy(u)
    bulk = integrate(cfg.grid, cfg.phi.Phi(dens * (t * t / 2.0)))
    A = concave_integral(u, cfg)
    B = convex_integral(u, cfg)
    return (
        bulk
        - cfg.lam / (cfg.q + 1.0) * t ** (cfg.q + 1.0) * A
        - 1.0 / (cfg.p + 1.0) * t ** (cfg.p + 1.0) * B
    )


def ray_energy_dt(u: Field, t: float, cfg: ProblemConfig) -> float:
    """γ'(t) = t∫φ(·t²)(u²+|∇u|²) − λt^q A − t^p B."""
    t = _check_t(t)
    dens = pointwise_energy(u)
    m0 = integrate(cfg.grid, np.asarray(cfg.phi.phi(dens * (t * t / 2.0))) * dens)
    A = concave_integral(u, cfg)
    B = convex_integral(u, cfg)
    return t * m0 - cfg.lam * t**cfg.q * A - t**cfg.p * B


def ray_energy_dt2(u: Field, t: float, cfg: ProblemConfig) -> float:
    """γ''(t), the exact second derivative of the ray energy."""
    t = _check_t(t)
    dens = pointwise_energy(u)
    arg = dens * (t * t / 2.0)
    m0 = integrate(cfg.grid, np.asarray(cfg.phi.phi(arg)) * dens)
    m1 = integrate(cfg.grid, np.asarray(cfg.phi.dphi(arg)) * dens**2)
    A = concave_integral(u, cfg)
    B = convex_integral(u, cfg)
    return (
        m0
        + t * t * m1
        - cfg.lam * cfg.q * t ** (cfg.q - 1.0) * A
        - cfg.p * t ** (cfg.p - 1.0) * B
    )


def ray_balance(u: Field, t: float, cfg: ProblemConfig) -> float:
    """Balance curve m(t); crossings of λ∫a|u|^{q+1} are Nehari scalings."""
    t = _check_t(t)
    dens = pointwise_energy(u)
    m0 = integrate(cfg.grid, np.asarray(cfg.phi.phi(dens * (t * t / 2.0))) * dens)
    B = convex_integral(u, cfg)
    return t ** (1.0 - cfg.q) * m0 - t ** (cfg.p - cfg.q) * B


def ray_balance_dt(u: Field, t: float, cfg: ProblemConfig) -> float:
    """m'(t); its sign at a crossing is the sign of the second ray derivative there."""
    t = _check_t(t)
    dens = pointwise_energy(u)
    arg = dens * (t * t / 2.0)
    m0 = integrate(cfg.grid, np.asarray(cfg.phi.phi(arg)) * dens)
    m1 = integrate(cfg.grid, np.asarray(cfg.phi.dphi(arg)) * dens**2)
    B = convex_integral(u, cfg)
    return (
        (1.0 - cfg.q) * t**-cfg.q * m0
        + t ** (2.0 - cfg.q) * m1
        - (cfg.p - cfg.q) * t ** (cfg.p - cfg.q - 1.0) * B
    )


def peak_equation(u: Field, t: float, cfg: ProblemConfig) -> float:
    """Strictly decreasing auxiliary η(t); η(t) = (p−q)B locates the balance peak."""
    t = _check_t(t)
    dens = pointwise_energy(u)
    arg = dens * (t * t / 2.0)
    m0 = integrate(cfg.grid, np.asarray(cfg.phi.phi(arg)) * dens)
    m1 = integrate(cfg.grid, np.asarray(cfg.phi.dphi(arg)) * dens**2)
    return t ** (1.0 - cfg.p) * ((1.0 - cfg.q) * m0 + t * t * m1)


def peak_equation_dt(u: Field, t: float, cfg: ProblemConfig) -> float:
    """η'(t); strictly negative whenever the concavity hypothesis holds."""
    t = _check_t(t)
    dens = pointwise_energy(u)
    arg = dens * (t * t / 2.0)
    m0 = integrate(cfg.grid, np.asarray(cfg.phi.phi(arg)) * dens)
    m1 = integrate(cfg.grid, np.asarray(cfg.phi.dphi(arg)) * dens**2)
    m2 = integrate(cfg.grid, np.asarray(cfg.phi.d2phi(arg)) * dens**3)
    return (
        (1.0 - cfg.q) * (1.0 - cfg.p) * t**-cfg.p * m0
        + (4.0 - cfg.p - cfg.q) * t ** (2.0 - cfg.p) * m1
        + t ** (4.0 - cfg.p) * m2
    )


def bare_ray_energy(u: Field, t: float, cfg: ProblemConfig) -> float:
    """Ray energy with the concave term dropped."""
    t = float(t)
    if t < 0.0:
        raise DomainError(f"bare ray energy needs t >= 0, got {t}")
    dens = pointwise_energy(u)
    bulk = integrate(cfg.grid, cfg.phi.Phi(dens * (t * t / 2.0)))
    B = convex_integral(u, cfg)
    return bulk - t ** (cfg.p + 1.0) / (cfg.p + 1.0) * B


# -- bracketing and bisection -------------------------------------------------


def _bisect(f, lo: float, hi: float, f_lo: float, rtol: float = BISECT_RTOL) -> float:
    """Certified bisection: f changes sign on [lo, hi]; returns the midpoint."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rtol * mid or mid in (lo, hi):
            return mid
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo = mid
            f_lo = f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _grow_down(f, t: float, want_negative: bool) -> tuple[float, float]:
    """Shrink t by the growth factor until sign(f) matches, within the cap."""
    while t >= BRACKET_LO_CAP:
        val = f(t)
        if (val < 0.0) == want_negative:
            return t, val
        t /= BRACKET_GROW
    raise BracketError(
        f"no sign change above the lower bracket cap {BRACKET_LO_CAP:g}"
    )


def _grow_up(f, t: float, want_negative: bool) -> tuple[float, float]:
    while t <= BRACKET_HI_CAP:
        val = f(t)
        if (val < 0.0) == want_negative:
            return t, val
        t *= BRACKET_GROW
    raise BracketError(
        f"no sign change below the upper bracket cap {BRACKET_HI_CAP:g}"
    )


def _peak_of_balance(data: _RayData) -> float:
    """Unique maximizer of the balance curve for B > 0.

    Solves the strictly decreasing peak equation η(t) = (p−q)B by bisection;
    the bracket is grown geometrically from [1/2, 2].
    """
    if data.convex <= 0.0:
        raise DomainError("balance peak requires a positive convex integral")
    target = (data.p - data.q) * data.convex

    def g(t: float) -> float:
        return data.peak_eq(t) - target

    lo, g_lo = _grow_down(g, 0.5, want_negative=False)  # g > 0 to the left
    hi, _ = _grow_up(g, max(2.0, 2.0 * lo), want_negative=True)
    return _bisect(g, lo, hi, g_lo)


def _balance_root(
    data: _RayData, lo: float, hi: float, rtol: float = BISECT_RTOL
) -> float:
    """Root of m(t) = λA inside a sign-changing bracket [lo, hi]."""

    def f(t: float) -> float:
        return data.balance(t) - data.lam * data.concave

    return _bisect(f, lo, hi, f(lo), rtol)


def _root_sign(data: _RayData, t: float) -> int:
    """Sign of the second ray derivative at a crossing, via the balance slope."""
    m1 = data.balance_dt(t)
    scale = (
        (1.0 - data.q) * t**-data.q * abs(data.moment0(t))
        + t ** (2.0 - data.q) * abs(data.moment1(t))
        + (data.p - data.q) * t ** (data.p - data.q - 1.0) * abs(data.convex)
    )
    if abs(m1) <= 1e-9 * scale:
        return 0
    return 1 if m1 > 0.0 else -1


def balance_peak(u: Field, cfg: ProblemConfig) -> float:
    """Scaling at which the balance curve attains its unique maximum (B > 0)."""
    data = _RayData(u, cfg)
    if data.convex <= 0.0:
        raise DomainError("balance peak requires ∫b|u|^{p+1} > 0")
    norm, scale = data.normalized()
    return _peak_of_balance(norm) / scale


def bare_ray_peak(u: Field, cfg: ProblemConfig) -> tuple[float, float]:
    """(t_max, value) of the bare ray energy; requires B > 0.

    The slope is positive for small t and negative for large t; the scan
    brackets every sign change, bisects each, and returns the global
    maximizer found.
    """
    data = _RayData(u, cfg)
    if data.convex <= 0.0:
        raise DomainError("bare ray peak requires ∫b|u|^{p+1} > 0")
    norm, scale = data.normalized()

    t_grid = np.logspace(-6, 6, 241)
    slopes = [norm.bare_slope_over_t(t) for t in t_grid]
    candidates = []
    for i in range(len(t_grid) - 1):
        if (slopes[i] > 0.0) != (slopes[i + 1] > 0.0):
            root = _bisect(
                norm.bare_slope_over_t, t_grid[i], t_grid[i + 1], slopes[i]
            )
            candidates.append(root)
    if not candidates:
        raise BracketError("no critical point of the bare ray energy on the scan")
    values = [norm.bare(t) for t in candidates]
    best = int(np.argmax(values))
    t_norm = candidates[best]
    # exact-quadrature value at the located peak, in input units
    t_input = t_norm / scale
    return t_input, bare_ray_energy(u, t_input, cfg)


@dataclass(frozen=True)
class FiberingDiagnosis:
    """Sign case, balance peak, and all Nehari crossings of one ray."""

    concave: float  # ∫ a |u|^{q+1}
    convex: float  # ∫ b |u|^{p+1}
    energy_int: float  # ∫ (u² + |∇u|²)
    case: str
    t_tilde: Optional[float]
    roots: tuple[tuple[float, int], ...]
    t_max: Optional[float]
    bare_peak_value: Optional[float]

    def as_dict(self) -> dict:
        return {
            "concave_integral": self.concave,
            "convex_integral": self.convex,
            "energy_integral": self.energy_int,
            "case": self.case,
            "t_tilde": self.t_tilde,
            "roots": [{"t": t, "gamma2_sign": s} for t, s in self.roots],
            "t_max": self.t_max,
            "bare_peak_value": self.bare_peak_value,
        }


@dataclass(frozen=True)
class NehariPoint:
    """A field projected onto one Nehari branch."""

    field: Field
    branch: str
    energy: float
    constraint: float  # |G| at the projected field
    gamma2: float  # second ray derivative at 1 for the projected field
    scale: float  # t* applied to the input field

    def as_dict(self) -> dict:
        return {
            "branch": self.branch,
            "energy": self.energy,
            "constraint": self.constraint,
            "gamma2": self.gamma2,
            "scale": self.scale,
        }


def classify(u: Field, cfg: ProblemConfig) -> FiberingDiagnosis:
    """Full sign-case taxonomy of the ray through u.

    Cases: both weighted integrals nonpositive (no crossing); concave
    positive only (one crossing, rising balance); convex positive only (one
    crossing past the peak); both positive (none, tangent, or two crossings
    depending on λ against the balance peak).
    """
    data = _RayData(u, cfg)
    norm, scale = data.normalized()
    lamA = norm.lam * norm.concave

    t_tilde_n: Optional[float] = None
    roots_n: list[tuple[float, int]] = []
    case: str
    if norm.convex <= 0.0:
        if lamA <= 0.0:
            case = CASE_NEITHER
        else:
            case = CASE_CONCAVE_ONLY

            def f(t: float) -> float:
                return norm.balance(t) - lamA

            lo, f_lo = _grow_down(f, 0.5, want_negative=True)
            hi, _ = _grow_up(f, max(2.0, 2.0 * lo), want_negative=False)
            t1 = _bisect(f, lo, hi, f_lo)
            roots_n.append((t1, _root_sign(norm, t1)))
    else:
        t_tilde_n = _peak_of_balance(norm)
        peak_value = norm.balance(t_tilde_n)
        if lamA <= 0.0:
            case = CASE_CONVEX_ONLY

            def f(t: float) -> float:
                return norm.balance(t) - lamA

            hi, _ = _grow_up(f, max(2.0, 2.0 * t_tilde_n), want_negative=True)
            t2 = _bisect(f, t_tilde_n, hi, peak_value - lamA)
            roots_n.append((t2, _root_sign(norm, t2)))
        elif abs(peak_value - lamA) <= TANGENT_RTOL * (1.0 + abs(lamA)):
            case = CASE_BOTH_TANGENT
            roots_n.append((t_tilde_n, 0))
        elif peak_value < lamA:
            case = CASE_BOTH_NO_ROOT
        else:
            case = CASE_BOTH_TWO_ROOTS

            def f(t: float) -> float:
                return norm.balance(t) - lamA

            lo, f_lo = _grow_down(f, min(0.5, t_tilde_n / 2.0), want_negative=True)
            t3 = _bisect(f, lo, t_tilde_n, f_lo)
            hi, _ = _grow_up(f, max(2.0, 2.0 * t_tilde_n), want_negative=True)
            t4 = _bisect(f, t_tilde_n, hi, peak_value - lamA)
            roots_n.append((t3, _root_sign(norm, t3)))
            roots_n.append((t4, _root_sign(norm, t4)))

    t_max_input: Optional[float] = None
    bare_value: Optional[float] = None
    if norm.convex > 0.0:
        t_max_input, bare_value = bare_ray_peak(u, cfg)

    return FiberingDiagnosis(
        concave=data.concave,
        convex=data.convex,
        energy_int=data.energy_int,
        case=case,
        t_tilde=(t_tilde_n / scale) if t_tilde_n is not None else None,
        roots=tuple((t / scale, s) for t, s in roots_n),
        t_max=t_max_input,
        bare_peak_value=bare_value,
    )


class _BranchUnavailable(Exception):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


def _find_branch_scale(norm: _RayData, branch: str) -> float:
    """Root of the branch-appropriate crossing for unit-energy ray data."""
    lamA = norm.lam * norm.concave

    def f(t: float) -> float:
        return norm.balance(t) - lamA

    if branch == "plus":
        if lamA <= 0.0:
            raise _BranchUnavailable("concave integral is nonpositive")
        if norm.convex <= 0.0:
            lo, f_lo = _grow_down(f, 0.5, want_negative=True)
            hi, _ = _grow_up(f, max(2.0, 2.0 * lo), want_negative=False)
            return _bisect(f, lo, hi, f_lo)
        t_tilde = _peak_of_balance(norm)
        peak_value = norm.balance(t_tilde)
        if abs(peak_value - lamA) <= TANGENT_RTOL * (1.0 + abs(lamA)):
            raise _BranchUnavailable("ray is tangent to the manifold")
        if peak_value < lamA:
            raise _BranchUnavailable("balance peak below the concave level (no crossing)")
        lo, f_lo = _grow_down(f, min(0.5, t_tilde / 2.0), want_negative=True)
        return _bisect(f, lo, t_tilde, f_lo)

    if norm.convex <= 0.0:
        raise _BranchUnavailable("convex integral is nonpositive")
    t_tilde = _peak_of_balance(norm)
    peak_value = norm.balance(t_tilde)
    if lamA > 0.0:
        if abs(peak_value - lamA) <= TANGENT_RTOL * (1.0 + abs(lamA)):
            raise _BranchUnavailable("ray is tangent to the manifold")
        if peak_value < lamA:
            raise _BranchUnavailable("balance peak below the concave level (no crossing)")
    hi, _ = _grow_up(f, max(2.0, 2.0 * t_tilde), want_negative=True)
    return _bisect(f, t_tilde, hi, peak_value - lamA)


def project_scale(u: Field, cfg: ProblemConfig, branch: str) -> tuple[Field, float]:
    """Projection without the report payload: the scaled field and t*.

    Same root logic as :func:`project`; the branch sign is verified through
    the balance slope at the root (exact identity with the second ray
    derivative of the scaled field).
    """
    if branch not in ("plus", "minus"):
        raise DomainError(f"branch must be 'plus' or 'minus', got {branch!r}")
    data = _RayData(u, cfg)
    norm, scale = data.normalized()
    try:
        t_star_n = _find_branch_scale(norm, branch)
    except _BranchUnavailable as stop:
        raise ProjectionError(
            f"branch {branch!r} unavailable: {stop.reason}",
            diagnosis=classify(u, cfg),
        ) from None
    sign = _root_sign(norm, t_star_n)
    want = 1 if branch == "plus" else -1
    if sign != want:
        raise ProjectionError(
            f"branch {branch!r} unavailable: balance slope sign {sign} at the root",
            diagnosis=classify(u, cfg),
        )
    t_star = t_star_n / scale
    return u.scaled(t_star), t_star


def project(u: Field, cfg: ProblemConfig, branch: str) -> NehariPoint:
    """Scale u onto the requested Nehari branch.

    branch "plus" needs a crossing with positive balance slope (rising
    side), branch "minus" one with negative slope (falling side past the
    peak).  Raises ProjectionError, carrying the diagnosis, if the ray does
    not reach the branch.
    """
    projected, t_star = project_scale(u, cfg, branch)
    gamma2 = ray_energy_dt2(projected, 1.0, cfg)
    return NehariPoint(
        field=projected,
        branch=branch,
        energy=energy(projected, cfg),
        constraint=abs(nehari_residual(projected, cfg)),
        gamma2=gamma2,
        scale=t_star,
    )


def sample_ray(u: Field, cfg: ProblemConfig, t_values) -> dict[str, list[float]]:
    """Tabulate γ, γ', γ'', m, η along the ray (for diagnosis CSV output)."""
    out: dict[str, list[float]] = {
        "t": [],
        "gamma": [],
        "gamma_dt": [],
        "gamma_dt2": [],
        "balance": [],
        "peak_eq": [],
    }
    for t in t_values:
        t = float(t)
        out["t"].append(t)
        out["gamma"].append(ray_energy(u, t, cfg))
        out["gamma_dt"].append(ray_energy_dt(u, t, cfg))
        out["gamma_dt2"].append(ray_energy_dt2(u, t, cfg))
        out["balance"].append(ray_balance(u, t, cfg))
        out["peak_eq"].append(peak_equation(u, t, cfg))
    return out
