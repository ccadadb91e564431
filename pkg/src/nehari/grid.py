"""Uniform box discretization with homogeneous Dirichlet boundary.

Everything downstream (energy, fibering, thresholds, solver) works on
node-valued fields over this grid.  The conventions are:

* interior nodes only are stored; the boundary value is identically zero
  and enters every stencil as a ghost value,
* the discrete gradient is the per-axis central difference, so the
  discrete energy is an exact, differentiable function of the node values,
* quadrature is the node rule (cell volume times node sum), which under
  the zero boundary is the trapezoid rule, and is reduced with exact
  compensated summation in lexicographic order for bit-reproducibility.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ConfigError, DomainError

logger = logging.getLogger(__name__)

__all__ = [
    "Grid",
    "Field",
    "Norms",
    "SobolevEstimate",
    "Weight",
    "gradient",
    "laplacian",
    "pointwise_energy",
    "integrate",
    "inner",
    "norms",
    "dirichlet_energy",
    "estimate_sobolev",
    "make_weight",
    "field_from_function",
    "random_smooth_field",
    "save_field",
    "load_field",
]


def _fsum(values: np.ndarray) -> float:
    """Exactly rounded sum over the C-order (lexicographic) ravel."""
    return math.fsum(values.ravel(order="C").tolist())


@dataclass(frozen=True)
class Grid:
    """Uniform box grid on Π_k (0, L_k) with n_k interior nodes per axis.

    Spacing is h_k = L_k/(n_k + 1); node j on axis k sits at (j+1)·h_k.
    Boundary nodes are not stored: fields vanish there.
    """

    nodes: tuple[int, ...]
    lengths: tuple[float, ...]

    def __post_init__(self) -> None:
        nodes = tuple(int(n) for n in self.nodes)
        lengths = tuple(float(L) for L in self.lengths)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "lengths", lengths)
        if len(nodes) < 1:
            raise ConfigError("grid", "dim", "dimension must be >= 1")
        if len(lengths) != len(nodes):
            raise ConfigError("grid", "lengths", "need one length per axis")
        if any(n < 3 for n in nodes):
            raise ConfigError("grid", "nodes", "need at least 3 interior nodes per axis")
        if any(L <= 0 for L in lengths):
            raise ConfigError("grid", "lengths", "side lengths must be positive")
        if len(nodes) <= 2:
            logger.warning(
                "grid dimension %d <= 2: the critical exponent is treated as +inf",
                len(nodes),
            )

    @property
    def dim(self) -> int:
        return len(self.nodes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.nodes

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / (n + 1) for n, L in zip(self.nodes, self.lengths))

    @property
    def cell_volume(self) -> float:
        vol = 1.0
        for h in self.spacing:
            vol *= h
        return vol

    @property
    def size(self) -> int:
        total = 1
        for n in self.nodes:
            total *= n
        return total

    def axis_coords(self, k: int) -> np.ndarray:
        """Interior node coordinates along axis k."""
        h = self.spacing[k]
        return h * np.arange(1, self.nodes[k] + 1)

    def coords(self) -> list[np.ndarray]:
        """Meshgrid ('ij' indexing) of interior node coordinates."""
        axes = [self.axis_coords(k) for k in range(self.dim)]
        return list(np.meshgrid(*axes, indexing="ij"))

    def critical_exponent(self) -> float:
        """2* = 2N/(N-2) for N > 2, +inf otherwise."""
        N = self.dim
        if N > 2:
            return 2.0 * N / (N - 2.0)
        return math.inf


@dataclass(frozen=True)
class Field:
    """Immutable scalar field on the interior nodes of a grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float)
        if arr.shape != self.grid.shape:
            raise DomainError(
                f"field shape {arr.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise DomainError("field contains non-finite entries")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def scaled(self, t: float) -> "Field":
        return Field(self.grid, t * self.values)


def field_from_function(grid: Grid, fn: Callable[..., np.ndarray]) -> Field:
    """Sample ``fn(x_0, ..., x_{N-1})`` at the interior nodes."""
    values = np.asarray(fn(*grid.coords()), dtype=float)
    values = np.broadcast_to(values, grid.shape)
    return Field(grid, values)


def _diff_central(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Central difference along one axis with zero ghost boundary."""
    out = np.zeros_like(values)
    head = [slice(None)] * values.ndim
    tail = [slice(None)] * values.ndim
    head[axis] = slice(None, -1)
    tail[axis] = slice(1, None)
    head_t, tail_t = tuple(head), tuple(tail)
    np.add(out[head_t], values[tail_t], out=out[head_t])
    np.subtract(out[tail_t], values[head_t], out=out[tail_t])
    out /= 2.0 * h
    return out


def gradient(u: Field) -> np.ndarray:
    """Discrete gradient: one central-difference component per axis.

    Returns an array of shape (N, *grid.shape).
    """
    grid = u.grid
    comps = [
        _diff_central(u.values, k, grid.spacing[k]) for k in range(grid.dim)
    ]
    return np.stack(comps)


def laplacian(u: Field) -> np.ndarray:
    """Composed divergence-of-gradient (central differences twice)."""
    grid = u.grid
    out = np.zeros(grid.shape)
    for k in range(grid.dim):
        h = grid.spacing[k]
        out += _diff_central(_diff_central(u.values, k, h), k, h)
    return out


def pointwise_energy(u: Field) -> np.ndarray:
    """Node values of u² + |∇u|²."""
    g = gradient(u)
    return u.values**2 + np.sum(g**2, axis=0)


def integrate(grid: Grid, values: np.ndarray) -> float:
    """Node-rule quadrature: (Π h_k) · Σ values, exactly summed."""
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise DomainError(
            f"integrand shape {values.shape} does not match grid shape {grid.shape}"
        )
    return grid.cell_volume * _fsum(values)


def inner(grid: Grid, x: np.ndarray, y: np.ndarray) -> float:
    """Quadrature-weighted L² inner product of two node arrays."""
    return integrate(grid, np.asarray(x) * np.asarray(y))


@dataclass(frozen=True)
class Norms:
    l2: float
    grad_l2: float
    lp: dict[float, float]


def norms(u: Field, orders: Iterable[float] = ()) -> Norms:
    """Quadrature-based ‖u‖_2, ‖∇u‖_2 and requested ‖u‖_r, r >= 1."""
    grid = u.grid
    l2 = math.sqrt(max(integrate(grid, u.values**2), 0.0))
    g = gradient(u)
    grad_l2 = math.sqrt(max(integrate(grid, np.sum(g**2, axis=0)), 0.0))
    lp: dict[float, float] = {}
    for r in orders:
        r = float(r)
        if r < 1:
            raise DomainError(f"Lp order must be >= 1, got {r}")
        lp[r] = integrate(grid, np.abs(u.values) ** r) ** (1.0 / r)
    return Norms(l2=l2, grad_l2=grad_l2, lp=lp)


# -- Sobolev constants -------------------------------------------------------
#
# The ratio uses the compact two-point-difference Dirichlet form (per-edge
# differences, zero boundary) rather than the wide central-difference
# stencil: the composed central operator annihilates checkerboard modes on
# odd node counts, so the ratio would be unbounded and the discrete first
# eigenvalue would not approach the continuum Π-limit.


def _dirichlet_apply(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Apply the compact-stencil negative Dirichlet Laplacian."""
    out = np.zeros(grid.shape)
    for k in range(grid.dim):
        h = grid.spacing[k]
        pad = [(0, 0)] * values.ndim
        pad[k] = (1, 1)
        padded = np.pad(values, pad, mode="constant")
        upper = [slice(None)] * values.ndim
        lower = [slice(None)] * values.ndim
        upper[k] = slice(2, None)
        lower[k] = slice(None, -2)
        out += (2.0 * values - padded[tuple(upper)] - padded[tuple(lower)]) / h**2
    return out


def dirichlet_energy(u: Field) -> float:
    """Compact-stencil H¹₀ seminorm squared: Σ_edges (Δu/h)² · cell volume."""
    grid = u.grid
    total = 0.0
    for k in range(grid.dim):
        h = grid.spacing[k]
        pad = [(0, 0)] * u.values.ndim
        pad[k] = (1, 1)
        padded = np.pad(u.values, pad, mode="constant")
        d = np.diff(padded, axis=k) / h
        total += grid.cell_volume * _fsum(d**2)
    return total


@dataclass(frozen=True)
class SobolevEstimate:
    order: float
    value: float
    method: str
    iterations: int


def estimate_sobolev(
    grid: Grid,
    order: float,
    tol: float = 1e-8,
    max_iter: int = 20000,
) -> SobolevEstimate:
    """Best discrete constant in ‖u‖_order ≤ S · |u|_{H¹₀}.

    Maximizes the ratio by ascent in the numerator direction projected
    against the constraint normal, renormalizing the Dirichlet seminorm to
    one after each step, until the ratio change drops below ``tol``.
    """
    order = float(order)
    two_star = grid.critical_exponent()
    if grid.dim > 2:
        if not (1.0 < order < two_star):
            raise DomainError(
                f"Sobolev order must lie in (1, {two_star:g}) for dim {grid.dim}, got {order}"
            )
    elif order < 1.0:
        raise DomainError(f"Sobolev order must be >= 1, got {order}")

    vol = grid.cell_volume

    def seminorm(v: np.ndarray) -> float:
        return math.sqrt(dirichlet_energy(Field(grid, v)))

    def lp_norm(v: np.ndarray) -> float:
        return (vol * _fsum(np.abs(v) ** order)) ** (1.0 / order)

    # generic positive start: centered bump, deliberately not an eigenmode
    r2 = np.zeros(grid.shape)
    for k in range(grid.dim):
        x = grid.axis_coords(k)
        shape = [1] * grid.dim
        shape[k] = -1
        c, w = 0.5 * grid.lengths[k], 0.35 * grid.lengths[k]
        r2 = r2 + (((x - c) / w) ** 2).reshape(shape)
    start = np.exp(-r2)
    u = start / seminorm(start)

    ratio = lp_norm(u)
    internal_tol = min(tol, 1e-10)
    iterations = 0
    step = 1.0
    small_gains = 0
    for iterations in range(1, max_iter + 1):
        # gradient of the numerator wrt node values
        num_grad = (
            vol * np.sign(u) * np.abs(u) ** (order - 1.0) * ratio ** (1.0 - order)
        )
        normal = _dirichlet_apply(grid, u)  # constraint normal (times cell volume)
        nn = float(np.vdot(normal, normal))
        d = num_grad - (float(np.vdot(num_grad, normal)) / nn) * normal
        slope = float(np.vdot(num_grad, d))  # = |d|², the composite derivative
        accepted = False
        while step > 1e-14:
            trial = u + step * d
            sn = seminorm(trial)
            if sn > 0:
                trial = trial / sn
                trial_ratio = lp_norm(trial)
                # sufficient increase, or plain increase once the predicted
                # gain is beneath float resolution of the ratio
                needed = 1e-4 * step * slope
                if trial_ratio >= ratio + needed and (
                    trial_ratio > ratio or needed < 1e-16 * ratio
                ):
                    accepted = trial_ratio > ratio
                    break
            step *= 0.5
        if not accepted:
            break  # no step improves the ratio: stationary within float
        gain = trial_ratio - ratio
        u, ratio = trial, trial_ratio
        step = min(step * 2.0, 1e6)
        # a single freshly-halved step can make accidentally-small progress,
        # so require the gain to stay below tolerance repeatedly
        small_gains = small_gains + 1 if gain < internal_tol else 0
        if small_gains >= 3:
            break
    return SobolevEstimate(
        order=order, value=ratio, method="projected-ascent", iterations=iterations
    )


# -- weight fields -----------------------------------------------------------


@dataclass(frozen=True)
class Weight:
    field: Field
    sup_norm: float
    sign_changing: bool


def make_weight(grid: Grid, spec: dict) -> Weight:
    """Sample a weight expression at the interior nodes.

    Supported kinds: affine, sinusoid (product of per-axis sinusoids),
    gaussians (signed pair of bumps), csv (node values).  A weight that does
    not change sign violates the standing sign-changing assumption and is
    flagged (and logged), not rejected.
    """
    kind = spec.get("kind")
    coords = grid.coords()
    if kind == "affine":
        const = float(spec.get("const", 0.0))
        coeffs = [float(c) for c in spec.get("coeffs", [])]
        if len(coeffs) > grid.dim:
            raise ConfigError(
                "weights", "coeffs", f"{len(coeffs)} coefficients for dim {grid.dim}"
            )
        values = np.full(grid.shape, const)
        for c, x in zip(coeffs, coords):
            values = values + c * x
    elif kind == "sinusoid":
        freqs = [float(f) for f in spec.get("freq", [1.0] * grid.dim)]
        phases = [float(t) for t in spec.get("phase", [0.0] * grid.dim)]
        if len(freqs) != grid.dim or len(phases) != grid.dim:
            raise ConfigError(
                "weights", "freq", f"need {grid.dim} frequencies and phases"
            )
        values = np.ones(grid.shape)
        for f, t, x in zip(freqs, phases, coords):
            values = values * np.sin(2.0 * math.pi * f * x + t)
    elif kind == "gaussians":
        values = _gaussian_pair(grid, spec, coords)
    elif kind == "csv":
        loaded = load_field(spec["path"])
        if loaded.grid != grid:
            raise ConfigError(
                "weights", "path", "node-value CSV grid does not match the run grid"
            )
        values = loaded.values
    else:
        raise ConfigError("weights", "kind", f"unknown weight kind {kind!r}")

    fld = Field(grid, values)
    sup = float(np.max(np.abs(fld.values)))
    changing = bool(np.any(fld.values > 0.0) and np.any(fld.values < 0.0))
    if not changing:
        logger.warning("weight of kind %r is not sign-changing on the grid", kind)
    return Weight(field=fld, sup_norm=sup, sign_changing=changing)


def _gaussian_pair(grid: Grid, spec: dict, coords: list[np.ndarray]) -> np.ndarray:
    def bump(center: Sequence[float], sigma: float) -> np.ndarray:
        if len(center) != grid.dim:
            raise ConfigError(
                "weights", "center", f"center needs {grid.dim} coordinates"
            )
        if sigma <= 0:
            raise ConfigError("weights", "sigma", "Gaussian width must be positive")
        r2 = np.zeros(grid.shape)
        for c, x in zip(center, coords):
            r2 = r2 + (x - float(c)) ** 2
        return np.exp(-r2 / sigma**2)

    amp_pos = float(spec.get("amp_pos", 1.0))
    amp_neg = float(spec.get("amp_neg", 1.0))
    pos = bump(spec["center_pos"], float(spec.get("sigma_pos", 0.15)))
    neg = bump(spec["center_neg"], float(spec.get("sigma_neg", 0.15)))
    return amp_pos * pos - amp_neg * neg


def random_smooth_field(
    grid: Grid, rng: np.random.Generator, max_mode: int = 3, scale: float = 1.0
) -> Field:
    """Seeded superposition of low-frequency sine products.

    Smooth trial fields are the desk-scale stand-in for H¹₀ functions; pure
    node noise is dominated by checkerboard modes invisible to the central
    difference and exercises nothing the theory speaks about.
    """
    values = np.zeros(grid.shape)
    modes = np.stack(
        np.meshgrid(*[np.arange(1, max_mode + 1)] * grid.dim, indexing="ij")
    ).reshape(grid.dim, -1)
    for idx in range(modes.shape[1]):
        k = modes[:, idx]
        amp = rng.standard_normal() / float(np.sum(k**2))
        term = np.ones(grid.shape)
        for axis in range(grid.dim):
            x = grid.axis_coords(axis) / grid.lengths[axis]
            shape = [1] * grid.dim
            shape[axis] = -1
            term = term * np.sin(math.pi * k[axis] * x).reshape(shape)
        values += amp * term
    return Field(grid, scale * values)


# -- field CSV I/O -----------------------------------------------------------
#
# Format: header line "dim,n1..nN,L1..LN", then one node value per line in
# lexicographic (C) order.


def save_field(path: str, u: Field) -> None:
    grid = u.grid
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = [str(grid.dim)]
        header += [str(n) for n in grid.nodes]
        header += [repr(L) for L in grid.lengths]
        writer.writerow(header)
        for v in u.values.ravel(order="C"):
            writer.writerow([repr(float(v))])


def load_field(path: str) -> Field:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError("field", path, "empty field CSV") from None
        try:
            dim = int(header[0])
            nodes = tuple(int(x) for x in header[1 : 1 + dim])
            lengths = tuple(float(x) for x in header[1 + dim : 1 + 2 * dim])
        except (IndexError, ValueError) as exc:
            raise ConfigError("field", path, f"malformed header: {header}") from exc
        if len(nodes) != dim or len(lengths) != dim:
            raise ConfigError("field", path, f"malformed header: {header}")
        grid = Grid(nodes=nodes, lengths=lengths)
        flat = []
        for row in reader:
            if not row:
                continue
            flat.append(float(row[0]))
    if len(flat) != grid.size:
        raise ConfigError(
            "field", path, f"expected {grid.size} node values, found {len(flat)}"
        )
    values = np.asarray(flat).reshape(grid.shape, order="C")
    return Field(grid, values)
