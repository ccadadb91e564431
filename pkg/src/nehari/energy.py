"""Discrete energy functional, its exact gradient, and manifold identities.

The functional is

    J(u) = ∫ Φ((u² + |∇u|²)/2) − (λ/(q+1)) ∫ a|u|^{q+1} − (1/(p+1)) ∫ b|u|^{p+1},

with all integrals the grid quadrature and ∇ the central difference.  The
gradient returned here is the exact derivative of this discrete J with
respect to node values (adjoint-of-stencil assembly), not a discretization
of the continuum Euler-Lagrange operator: directional derivatives therefore
match finite differences of J to round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .grid import Field, Grid, _diff_central, gradient, integrate, pointwise_energy
from .phi import PhiModel

__all__ = [
    "ProblemConfig",
    "SecondDerivativeForms",
    "ManifoldEnergies",
    "energy",
    "energy_gradient",
    "dual_norm",
    "nehari_residual",
    "concave_integral",
    "convex_integral",
    "second_derivative_forms",
    "manifold_energies",
]


@dataclass(frozen=True)
class ProblemConfig:
    """Full problem data: grid, operator family, weights, exponents, tolerances."""

    grid: Grid
    phi: PhiModel
    a: Field
    b: Field
    lam: float
    q: float
    p: float
    root_tol: float = 1e-12
    residual_tol: float = 1e-6
    max_iter: int = 5000

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if not (0.0 < self.q < 1.0):
            raise DomainError(f"q must lie in (0, 1), got {self.q}")
        two_star = self.grid.critical_exponent()
        if not (1.0 < self.p and self.p + 1.0 < two_star):
            raise DomainError(
                f"p must satisfy 1 < p and p+1 < {two_star:g}, got {self.p}"
            )
        for name, w in (("a", self.a), ("b", self.b)):
            if w.grid != self.grid:
                raise DomainError(f"weight {name} lives on a different grid")
        if self.root_tol <= 0 or self.residual_tol <= 0:
            raise DomainError("tolerances must be positive")

    def with_lambda(self, lam: float) -> "ProblemConfig":
        return replace(self, lam=float(lam))


def _check_field(u: Field, cfg: ProblemConfig) -> None:
    if u.grid != cfg.grid:
        raise DomainError("field lives on a different grid than the problem")


def concave_integral(u: Field, cfg: ProblemConfig) -> float:
    """∫ a |u|^{q+1}."""
    _check_field(u, cfg)
    return integrate(cfg.grid, cfg.a.values * np.abs(u.values) ** (cfg.q + 1.0))


def convex_integral(u: Field, cfg: ProblemConfig) -> float:
    """∫ b |u|^{p+1}."""
    _check_field(u, cfg)
    return integrate(cfg.grid, cfg.b.values * np.abs(u.values) ** (cfg.p + 1.0))


def energy(u: Field, cfg: ProblemConfig) -> float:
    """J(u) by direct quadrature."""
    _check_field(u, cfg)
    dens = pointwise_energy(u)
    bulk = integrate(cfg.grid, cfg.phi.Phi(dens / 2.0))
    return (
        bulk
        - cfg.lam / (cfg.q + 1.0) * concave_integral(u, cfg)
        - 1.0 / (cfg.p + 1.0) * convex_integral(u, cfg)
    )


def energy_gradient(u: Field, cfg: ProblemConfig) -> np.ndarray:
    """Exact partial derivatives ∂J/∂u_i of the discrete functional.

    Plain dot products against direction arrays give directional
    derivatives.  The concave term's derivative |u|^{q-1}u is extended by
    zero at u = 0 (its continuous limit for q > 0).
    """
    _check_field(u, cfg)
    grid = cfg.grid
    vals = u.values
    grad = gradient(u)
    dens = vals**2 + np.sum(grad**2, axis=0)
    coeff = np.asarray(cfg.phi.phi(dens / 2.0), dtype=float)

    out = coeff * vals
    # adjoint of the central-difference stencil: D_k^T = -D_k
    for k in range(grid.dim):
        out -= _diff_central(coeff * grad[k], k, grid.spacing[k])
    out -= cfg.lam * cfg.a.values * np.sign(vals) * np.abs(vals) ** cfg.q
    out -= cfg.b.values * np.sign(vals) * np.abs(vals) ** cfg.p
    return grid.cell_volume * out


def dual_norm(grad_arr: np.ndarray, grid: Grid) -> float:
    """Quadrature-weighted dual norm sqrt(Σ g_i²/w_i) of a gradient array.

    Equals the L² norm of the pointwise gradient field, so its magnitude is
    grid-resolution independent.
    """
    return math.sqrt(
        math.fsum((grad_arr.ravel(order="C") ** 2).tolist()) / grid.cell_volume
    )


def nehari_residual(u: Field, cfg: ProblemConfig) -> float:
    """G(u) = ⟨J'(u), u⟩ = ∫ φ(·)(u²+|∇u|²) − λ∫a|u|^{q+1} − ∫b|u|^{p+1}.

    Zero exactly on the Nehari manifold.
    """
    _check_field(u, cfg)
    g = energy_gradient(u, cfg)
    return math.fsum((g * u.values).ravel(order="C").tolist())


class SecondDerivativeForms(NamedTuple):
    """The two on-manifold expressions for the second ray derivative at 1.

    ``via_b`` eliminates the concave integral, ``via_a`` the convex one;
    off the manifold they differ by (p−q)·G(u).
    """

    via_b: float
    via_a: float


def second_derivative_forms(u: Field, cfg: ProblemConfig) -> SecondDerivativeForms:
    _check_field(u, cfg)
    dens = pointwise_energy(u)
    coeff = np.asarray(cfg.phi.phi(dens / 2.0), dtype=float)
    dcoeff = np.asarray(cfg.phi.dphi(dens / 2.0), dtype=float)
    curv = integrate(cfg.grid, dcoeff * dens**2)
    bulk = integrate(cfg.grid, coeff * dens)
    A = concave_integral(u, cfg)
    B = convex_integral(u, cfg)
    via_b = curv + (1.0 - cfg.q) * bulk - (cfg.p - cfg.q) * B
    via_a = curv - (cfg.p - 1.0) * bulk + cfg.lam * (cfg.p - cfg.q) * A
    return SecondDerivativeForms(via_b=via_b, via_a=via_a)


class ManifoldEnergies(NamedTuple):
    """The two reduced energies, equal to J(u) whenever G(u) = 0."""

    via_b: float
    via_a: float


def manifold_energies(u: Field, cfg: ProblemConfig) -> ManifoldEnergies:
    _check_field(u, cfg)
    dens = pointwise_energy(u)
    bulk_Phi = integrate(cfg.grid, cfg.phi.Phi(dens / 2.0))
    bulk_phi = integrate(cfg.grid, np.asarray(cfg.phi.phi(dens / 2.0)) * dens)
    A = concave_integral(u, cfg)
    B = convex_integral(u, cfg)
    q1 = cfg.q + 1.0
    p1 = cfg.p + 1.0
    via_b = bulk_Phi - bulk_phi / q1 + (1.0 / q1 - 1.0 / p1) * B
    via_a = bulk_Phi - bulk_phi / p1 - cfg.lam * (1.0 / q1 - 1.0 / p1) * A
    return ManifoldEnergies(via_b=via_b, via_a=via_a)
