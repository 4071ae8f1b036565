import numpy as np
import pytest

from macflow.energy import EnergyReport, discrete_energy, dissipation_check, gradient_energy
from macflow.matfield import MatrixField, ModelParams
from macflow.scenarios import ScenarioSpec


def _fd_gradient_energy(u, eps):
    # 4th-order central differences on the periodic unit square
    n = u.shape[0]
    h = 1.0 / n
    d = lambda a, ax: (8 * (np.roll(a, -1, ax) - np.roll(a, 1, ax))
                       - (np.roll(a, -2, ax) - np.roll(a, 2, ax))) / (12 * h)
    return 0.5 * eps ** 2 * np.sum(d(u, 0) ** 2 + d(u, 1) ** 2) * h * h


def test_constant_orthonormal_field_has_zero_energy():
    p = ModelParams(3, 2, 0.01)
    Q = np.linalg.qr(np.random.default_rng(0).standard_normal((3, 3)))[0][:, :2]
    rep = discrete_energy(MatrixField.constant(8, 8, Q), p)
    assert abs(rep.total) < 1e-28 and rep.gradient_part < 1e-28


def test_zero_field_energy():
    rep = discrete_energy(MatrixField.zeros(16, 8, 2, 1), ModelParams(2, 1, 0.1))
    assert rep.total == pytest.approx(0.25, rel=1e-15)
    assert rep.gradient_part == 0.0


def test_single_mode_gradient_part_spectral():
    n, eps = 256, 0.1
    X, _ = MatrixField.zeros(n, n, 1, 1).coords()
    u = np.sin(2 * np.pi * X)
    want = 0.01 * np.pi ** 2  # eps^2/2 * 4 pi^2 * 1/2
    got = gradient_energy(u[:, :, None, None], eps, symbol="spectral")
    assert got == pytest.approx(want, rel=1e-12)
    assert abs(_fd_gradient_energy(u, eps) - got) < 1e-6


def test_two_mode_field_spectral_vs_fd():
    n, eps = 256, 0.1
    X, Y = MatrixField.zeros(n, n, 1, 1).coords()
    u = np.sin(2 * np.pi * X) * np.cos(4 * np.pi * Y) + 0.5 * np.cos(2 * np.pi * (X + Y))
    spec = gradient_energy(u[:, :, None, None], eps, symbol="spectral")
    fd2 = gradient_energy(u[:, :, None, None], eps, symbol="fd")
    assert abs(_fd_gradient_energy(u, eps) - spec) < 1e-6
    # the 2nd-order symbol converges to the same value
    assert fd2 == pytest.approx(spec, rel=1e-3)


def test_fd_symbol_gradient_matches_differences(rng):
    n, eps = 16, 0.3
    u = rng.standard_normal((n, n, 2, 1))
    h = 1.0 / n
    fwd = lambda a, ax: (np.roll(a, -1, ax) - a) / h
    want = 0.5 * eps ** 2 * np.sum(fwd(u, 0) ** 2 + fwd(u, 1) ** 2) * h * h
    assert gradient_energy(u, eps, symbol="fd") == pytest.approx(want, rel=1e-12)


def test_report_invariants(rng):
    p = ModelParams(2, 2, 0.05)
    U = ScenarioSpec("petal", 2, 2, 32, 32).build()
    rep = discrete_energy(U, p, t=1.5)
    assert rep.gradient_part >= 0 and rep.potential_part >= 0
    assert rep.total == rep.gradient_part + rep.potential_part
    assert rep.t == 1.5


def test_energy_vanishes_only_on_constant_orthonormal(rng):
    p = ModelParams(2, 1, 0.05)
    U = ScenarioSpec("random_vector", 2, 1, 16, 16, seed=1).build()
    assert discrete_energy(U, p).total > 1e-6
    assert discrete_energy(MatrixField.constant(16, 16, [[0.9], [0.0]]), p).total > 1e-6


def test_dissipation_check_examples():
    assert dissipation_check([5.0, 4.0, 3.0, 2.5]) == []
    series = list(np.linspace(1.0, 0.5, 12))
    series[8] = series[7] + 1e-3
    assert dissipation_check(series, tol=1e-10) == [7]
    reps = [EnergyReport(total=v, gradient_part=v, potential_part=0.0, t=k)
            for k, v in enumerate([1.0, 1.0 + 5e-11, 0.9])]
    assert dissipation_check(reps) == []
    assert dissipation_check(reps, tol=1e-12) == [0]
