import math

import numpy as np
import pytest

from nehari.energy import concave_integral, convex_integral, energy, second_derivative_forms
from nehari.errors import DomainError, ProjectionError
from nehari.fibering import (
    CASE_BOTH_TWO_ROOTS,
    CASE_CONCAVE_ONLY,
    CASE_CONVEX_ONLY,
    CASE_NEITHER,
    balance_peak,
    bare_ray_energy,
    bare_ray_peak,
    classify,
    peak_equation,
    peak_equation_dt,
    project,
    ray_balance,
    ray_balance_dt,
    ray_energy,
    ray_energy_dt,
    ray_energy_dt2,
    sample_ray,
)
from nehari.grid import Field, Grid, integrate, pointwise_energy
from nehari.phi import constant_model, stuart_model

from conftest import make_problem, smooth_fields


def fixed_sign_problem(sign_a, sign_b, nodes=(5, 5, 5), phi=None, lam=1.0):
    """Problem whose weights have one sign, to force specific ray cases."""
    from nehari.energy import ProblemConfig

    grid = Grid(nodes=nodes, lengths=(1.0,) * len(nodes))
    a = Field(grid, np.full(grid.shape, float(sign_a)))
    b = Field(grid, np.full(grid.shape, float(sign_b)))
    return ProblemConfig(
        grid=grid,
        phi=phi if phi is not None else stuart_model(6.0),
        a=a,
        b=b,
        lam=lam,
        q=0.5,
        p=3.0,
    )


def scan_root_count(u, cfg, points=100000):
    """Oracle: sign changes of the ray slope on a dense log grid."""
    t = np.logspace(-6, 6, points)
    dens = pointwise_energy(u)
    A = concave_integral(u, cfg)
    B = convex_integral(u, cfg)
    vol = cfg.grid.cell_volume
    vals = np.empty(points)
    dens_flat = dens.ravel()
    chunk = 512
    for i in range(0, points, chunk):
        ts = t[i : i + chunk][:, None]
        arg = dens_flat[None, :] * (ts**2 / 2.0)
        m0 = vol * np.sum(cfg.phi.raw_phi(arg) * dens_flat[None, :], axis=1)
        vals[i : i + len(ts)] = (
            ts[:, 0] * m0 - cfg.lam * ts[:, 0] ** cfg.q * A - ts[:, 0] ** cfg.p * B
        )
    signs = np.sign(vals)
    signs = signs[signs != 0.0]
    return int(np.sum(np.diff(signs) != 0.0))


def test_ray_energy_at_one_is_energy(cfg_small):
    for u in smooth_fields(cfg_small.grid, 10, seed=20):
        assert (
            abs(ray_energy(u, 1.0, cfg_small) - energy(u, cfg_small))
            <= 1e-12 * (1.0 + abs(energy(u, cfg_small)))
        )


def test_ray_slope_closed_form_constant_phi(cfg_const):
    cfg = cfg_const
    u = smooth_fields(cfg.grid, 1, seed=21)[0]
    E = integrate(cfg.grid, pointwise_energy(u))
    A = concave_integral(u, cfg)
    B = convex_integral(u, cfg)
    for t in (0.2, 1.0, 2.7):
        expect = t * E - cfg.lam * t**cfg.q * A - t**cfg.p * B
        assert abs(ray_energy_dt(u, t, cfg) - expect) <= 1e-12 * max(abs(expect), 1.0)


def test_derivatives_match_finite_differences(cfg_small):
    rng = np.random.default_rng(22)
    fields = smooth_fields(cfg_small.grid, 10, seed=22)
    for u in fields:
        t = float(rng.uniform(0.3, 3.0))
        h = 1e-6 * t
        fd1 = (ray_energy(u, t + h, cfg_small) - ray_energy(u, t - h, cfg_small)) / (2 * h)
        d1 = ray_energy_dt(u, t, cfg_small)
        assert abs(d1 - fd1) <= 1e-7 * (1.0 + abs(fd1))
        fd2 = (
            ray_energy_dt(u, t + h, cfg_small) - ray_energy_dt(u, t - h, cfg_small)
        ) / (2 * h)
        d2 = ray_energy_dt2(u, t, cfg_small)
        assert abs(d2 - fd2) <= 1e-7 * (1.0 + abs(fd2))
        fdm = (ray_balance(u, t + h, cfg_small) - ray_balance(u, t - h, cfg_small)) / (2 * h)
        dm = ray_balance_dt(u, t, cfg_small)
        assert abs(dm - fdm) <= 1e-7 * (1.0 + abs(fdm))
        fde = (peak_equation(u, t + h, cfg_small) - peak_equation(u, t - h, cfg_small)) / (2 * h)
        de = peak_equation_dt(u, t, cfg_small)
        assert abs(de - fde) <= 1e-7 * (1.0 + abs(fde))


def test_slope_factorization(cfg_small):
    # gamma'(t) = t^q (m(t) - lam*A) exactly
    rng = np.random.default_rng(23)
    for u in smooth_fields(cfg_small.grid, 10, seed=23):
        A = concave_integral(u, cfg_small)
        t = float(rng.uniform(0.1, 5.0))
        lhs = ray_energy_dt(u, t, cfg_small)
        rhs = t**cfg_small.q * (ray_balance(u, t, cfg_small) - cfg_small.lam * A)
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs), 1e-30)


def test_scaled_second_derivative_identity(cfg_small):
    # gamma''_{tu}(1) = t^{q+2} m'(t) for every u and t (via the manifold form)
    rng = np.random.default_rng(24)
    for u in smooth_fields(cfg_small.grid, 20, seed=24):
        t = float(rng.uniform(0.2, 4.0))
        via_b, _ = second_derivative_forms(u.scaled(t), cfg_small)
        rhs = t ** (cfg_small.q + 2.0) * ray_balance_dt(u, t, cfg_small)
        assert abs(via_b - rhs) <= 1e-8 * max(abs(via_b), abs(rhs), 1e-30)


def test_balance_monotone_when_convex_nonpositive():
    cfg = fixed_sign_problem(+1.0, -1.0)
    rng = np.random.default_rng(25)
    for u in smooth_fields(cfg.grid, 5, seed=25):
        for t in rng.uniform(0.05, 8.0, size=10):
            assert ray_balance_dt(u, float(t), cfg) > 0.0


def test_peak_equation_constant_phi_closed_form(cfg_const):
    # phi = c: eta(t) = (1-q) c t^{1-p} E_u
    cfg = cfg_const
    u = smooth_fields(cfg.grid, 1, seed=26)[0]
    E = integrate(cfg.grid, pointwise_energy(u))
    for t in (0.4, 1.0, 3.1):
        expect = (1.0 - cfg.q) * t ** (1.0 - cfg.p) * E
        assert abs(peak_equation(u, t, cfg) - expect) <= 1e-12 * abs(expect)


def test_peak_equation_strictly_decreasing(cfg_small):
    # eta'(t) < 0 whenever the concavity hypothesis holds, and eta decreases
    rng = np.random.default_rng(27)
    fields = smooth_fields(cfg_small.grid, 5, seed=27)
    for u in fields:
        for t in rng.uniform(0.05, 6.0, size=10):
            assert peak_equation_dt(u, float(t), cfg_small) < 0.0
    for u in fields:
        pairs = rng.uniform(0.05, 6.0, size=(10, 2))
        for t1, t2 in pairs:
            lo, hi = min(t1, t2), max(t1, t2)
            if hi - lo < 1e-9:
                continue
            assert peak_equation(u, hi, cfg_small) < peak_equation(u, lo, cfg_small)


def test_balance_peak_constant_phi_closed_form(cfg_const):
    # phi = 1: t_tilde = [((1-q)E)/((p-q)B)]^{1/(p-1)}
    cfg = cfg_const
    for u in smooth_fields(cfg.grid, 10, seed=28):
        B = convex_integral(u, cfg)
        if B <= 0:
            continue
        E = integrate(cfg.grid, pointwise_energy(u))
        expect = (((1.0 - cfg.q) * E) / ((cfg.p - cfg.q) * B)) ** (1.0 / (cfg.p - 1.0))
        got = balance_peak(u, cfg)
        assert abs(got - expect) <= 1e-10 * expect


def test_balance_peak_bracket_signs(cfg_small):
    for u in smooth_fields(cfg_small.grid, 10, seed=29):
        if convex_integral(u, cfg_small) <= 0:
            continue
        t = balance_peak(u, cfg_small)
        assert ray_balance_dt(u, t * (1.0 - 1e-3), cfg_small) > 0.0
        assert ray_balance_dt(u, t * (1.0 + 1e-3), cfg_small) < 0.0


def test_balance_peak_matches_dense_scan(cfg_small):
    # log-grid argmax of the balance curve agrees within one grid cell
    found = 0
    for u in smooth_fields(cfg_small.grid, 10, seed=30):
        if convex_integral(u, cfg_small) <= 0:
            continue
        found += 1
        t_grid = np.logspace(-3, 4, 100000)
        vals = np.array([ray_balance(u, float(t), cfg_small) for t in t_grid[::100]])
        coarse = t_grid[::100]
        k = int(np.argmax(vals))
        lo = coarse[max(k - 1, 0)]
        hi = coarse[min(k + 1, len(coarse) - 1)]
        t = balance_peak(u, cfg_small)
        assert lo <= t <= hi
        if found >= 3:
            break
    assert found >= 1


def test_balance_limits(cfg_small):
    # m -> 0 as t -> 0+ at the t^{1-q} rate, and the sign at t = 1e6
    # follows the convex-integral dichotomy
    report = None
    from nehari.phi import verify_hypotheses

    report = verify_hypotheses(cfg_small.phi, cfg_small.q, cfg_small.p)
    for u in smooth_fields(cfg_small.grid, 10, seed=31):
        E = integrate(cfg_small.grid, pointwise_energy(u))
        B = convex_integral(u, cfg_small)
        t0 = 1e-8
        bound = 2.0 * report.rho1 * t0 ** (1.0 - cfg_small.q) * E + 2.0 * abs(B) * t0 ** (
            cfg_small.p - cfg_small.q
        )
        assert abs(ray_balance(u, t0, cfg_small)) <= bound
        # a q-adapted shrink reaches any fixed smallness target
        t1 = min(t0, (1e-7 / (report.rho1 * E)) ** (1.0 / (1.0 - cfg_small.q)))
        assert abs(ray_balance(u, t1, cfg_small)) <= 1e-6 * E
        big = ray_balance(u, 1e6, cfg_small)
        if B > 0:
            assert big < 0.0
        else:
            assert big > 0.0


def test_bare_peak_constant_phi_closed_form(cfg_const):
    # phi = 1: h'(t)=0 at t = (E/B)^{1/(p-1)}, and scaling t_max(cu) = t_max(u)/c
    cfg = cfg_const
    done = 0
    for u in smooth_fields(cfg.grid, 10, seed=32):
        B = convex_integral(u, cfg)
        if B <= 0:
            continue
        E = integrate(cfg.grid, pointwise_energy(u))
        expect = (E / B) ** (1.0 / (cfg.p - 1.0))
        t_max, value = bare_ray_peak(u, cfg)
        assert abs(t_max - expect) <= 1e-9 * expect
        t_max2, _ = bare_ray_peak(u.scaled(2.0), cfg)
        assert abs(t_max2 - t_max / 2.0) <= 1e-9 * t_max
        assert abs(value - bare_ray_energy(u, t_max, cfg)) == 0.0
        done += 1
        if done >= 3:
            break
    assert done >= 1


def test_bare_peak_requires_positive_convex(cfg_small):
    cfg = fixed_sign_problem(+1.0, -1.0)
    u = smooth_fields(cfg.grid, 1, seed=33)[0]
    with pytest.raises(DomainError):
        bare_ray_peak(u, cfg)
    with pytest.raises(DomainError):
        balance_peak(u, cfg)


def test_case_neither(cfg_small):
    cfg = fixed_sign_problem(-1.0, -1.0)
    for u in smooth_fields(cfg.grid, 3, seed=34):
        diag = classify(u, cfg)
        assert diag.case == CASE_NEITHER
        assert diag.roots == ()
        # the ray slope stays positive: no crossing anywhere
        for t in (0.1, 1.0, 10.0):
            assert ray_energy_dt(u, t, cfg) > 0.0


def test_case_concave_only(cfg_small):
    cfg = fixed_sign_problem(+1.0, -1.0)
    for u in smooth_fields(cfg.grid, 3, seed=35):
        diag = classify(u, cfg)
        assert diag.case == CASE_CONCAVE_ONLY
        assert len(diag.roots) == 1
        t1, sign = diag.roots[0]
        assert sign == 1
        # global minimum with negative value
        assert ray_energy(u, t1, cfg) < 0.0


def test_case_convex_only(cfg_small):
    cfg = fixed_sign_problem(-1.0, +1.0)
    for u in smooth_fields(cfg.grid, 3, seed=36):
        diag = classify(u, cfg)
        assert diag.case == CASE_CONVEX_ONLY
        assert len(diag.roots) == 1
        t2, sign = diag.roots[0]
        assert sign == -1
        assert t2 > diag.t_tilde
        # global maximum with positive value
        assert ray_energy(u, t2, cfg) > 0.0


def test_case_both_two_roots(cfg_small):
    cfg = fixed_sign_problem(+1.0, +1.0, lam=0.5)
    for u in smooth_fields(cfg.grid, 3, seed=37):
        diag = classify(u, cfg)
        assert diag.case == CASE_BOTH_TWO_ROOTS
        (t3, s3), (t4, s4) = diag.roots
        assert s3 == 1 and s4 == -1
        assert t3 < diag.t_tilde < t4


def test_case_both_no_root(cfg_small):
    # large lam pushes the concave level above the balance peak
    cfg = fixed_sign_problem(+1.0, +1.0, lam=1e6)
    u = smooth_fields(cfg.grid, 1, seed=38)[0]
    diag = classify(u, cfg)
    assert diag.case == "both_positive_no_root"
    assert diag.roots == ()
    for t in (0.1, 1.0, 10.0):
        assert ray_energy_dt(u, t, cfg) < 0.0


def test_classification_matches_scan_oracle():
    # lam is sized so every concave-level crossing lands inside the scan
    # window of the oracle; fields are normalized to unit energy integral
    cfg = make_problem(lam=300.0)
    seen = set()
    for u in smooth_fields(cfg.grid, 30, seed=39):
        E = integrate(cfg.grid, pointwise_energy(u))
        u = u.scaled(1.0 / math.sqrt(E))
        diag = classify(u, cfg)
        seen.add(diag.case)
        assert not [t for t, s in diag.roots if s == 0]
        assert scan_root_count(u, cfg, points=20000) == len(diag.roots)
    assert len(seen) >= 3  # taxonomy variety, not a single-case sweep


def test_classify_rejects_zero_field(cfg_small):
    with pytest.raises(DomainError):
        classify(Field(cfg_small.grid, np.zeros(cfg_small.grid.shape)), cfg_small)


def test_projection_idempotent(cfg_small):
    for u in smooth_fields(cfg_small.grid, 10, seed=40):
        for branch in ("plus", "minus"):
            try:
                point = project(u, cfg_small, branch)
            except ProjectionError:
                continue
            again = project(point.field, cfg_small, branch)
            assert abs(again.scale - 1.0) <= 1e-9


def test_projection_signs_and_convex_only_positive_energy(cfg_small):
    cfg = fixed_sign_problem(-1.0, +1.0)
    for u in smooth_fields(cfg.grid, 3, seed=41):
        point = project(u, cfg, "minus")
        assert point.gamma2 < 0.0
        assert point.energy > 0.0
        with pytest.raises(ProjectionError):
            project(u, cfg, "plus")


def test_projection_scaled_second_derivative(cfg_small):
    # at the returned point: gamma''(1) of the projected field equals
    # t^{q+2} m'(t) of the input ray at the projection scale
    for u in smooth_fields(cfg_small.grid, 10, seed=42):
        for branch in ("plus", "minus"):
            try:
                point = project(u, cfg_small, branch)
            except ProjectionError:
                continue
            t = point.scale
            rhs = t ** (cfg_small.q + 2.0) * ray_balance_dt(u, t, cfg_small)
            assert abs(point.gamma2 - rhs) <= 1e-8 * max(abs(point.gamma2), abs(rhs))


def test_projection_error_carries_diagnosis(cfg_small):
    cfg = fixed_sign_problem(-1.0, -1.0)
    u = smooth_fields(cfg.grid, 1, seed=43)[0]
    with pytest.raises(ProjectionError) as err:
        project(u, cfg, "plus")
    assert err.value.diagnosis is not None
    assert err.value.diagnosis.case == CASE_NEITHER


def test_bare_peak_clears_threshold_floor():
    # h(t_max) >= delta for fields with positive convex integral
    from nehari.grid import estimate_sobolev
    from nehari.phi import verify_hypotheses
    from nehari.thresholds import compute_thresholds

    cfg = make_problem(nodes=(7, 7, 7), phi=constant_model(1.0), lam=1.0)
    hyp = verify_hypotheses(cfg.phi, cfg.q, cfg.p)
    sob = {
        cfg.q + 1.0: estimate_sobolev(cfg.grid, cfg.q + 1.0),
        cfg.p + 1.0: estimate_sobolev(cfg.grid, cfg.p + 1.0),
    }
    th = compute_thresholds(hyp, sob, cfg)
    checked = 0
    for u in smooth_fields(cfg.grid, 100, seed=44):
        if convex_integral(u, cfg) <= 0.0:
            continue
        _, value = bare_ray_peak(u, cfg)
        assert value >= th.delta - 1e-9
        checked += 1
        if checked >= 50:
            break
    assert checked >= 50


def test_sample_ray_table(cfg_small):
    u = smooth_fields(cfg_small.grid, 1, seed=45)[0]
    table = sample_ray(u, cfg_small, [0.5, 1.0, 2.0])
    assert table["t"] == [0.5, 1.0, 2.0]
    assert len(table["gamma"]) == 3
    assert abs(table["gamma"][1] - energy(u, cfg_small)) <= 1e-12 * (
        1.0 + abs(energy(u, cfg_small))
    )
