"""Petviashvili ground-state solver: step algebra, convergence, diagnostics."""

import numpy as np
import pytest

from mixlap.errors import DegenerateIterateError
from mixlap.params import KernelParams
from mixlap import solver as V
from mixlap import spectral as S

P2 = KernelParams(2, 0.5)


@pytest.fixture(scope="module")
def ground_state():
    """Converged ground state on a small box, shared across the module."""
    grid = S.GridSpec(2, 15.0, 128)
    cfg = V.SolverConfig(p=3.0, tol_residual=1e-10)
    u, report = V.solve_ground_state(grid, P2, cfg)
    assert report.converged
    return grid, cfg, u, report


class TestConfig:
    def test_default_gamma(self):
        cfg = V.SolverConfig(p=3.0)
        assert cfg.gamma_stab == pytest.approx(1.5)

    def test_validation(self):
        with pytest.raises(ValueError):
            V.SolverConfig(p=1.0)
        with pytest.raises(ValueError):
            V.SolverConfig(p=3.0, tol_residual=0.0)
        with pytest.raises(ValueError):
            V.SolverConfig(p=3.0, init="bogus")

    def test_subcriticality(self):
        V.SolverConfig(p=4.9).check_subcritical(3)
        with pytest.raises(ValueError):
            V.SolverConfig(p=5.0).check_subcritical(3)
        V.SolverConfig(p=7.0).check_subcritical(2)  # no upper bound in 2-D


class TestEnergyAndGradient:
    def test_zero_field(self):
        grid = S.GridSpec(2, 10.0, 32)
        cfg = V.SolverConfig(p=3.0)
        zero = S.RealField(grid, np.zeros(grid.shape))
        assert V.energy_plus(zero, P2, cfg) == 0.0
        assert np.abs(V.gradient_plus(zero, P2, cfg).data).max() == 0.0

    def test_nonpositive_field_energy(self):
        # u <= 0: the nonlinear term vanishes and the energy is quadratic
        grid = S.GridSpec(2, 10.0, 32)
        cfg = V.SolverConfig(p=3.0)
        u = S.RealField(grid, -np.exp(-grid.radius() ** 2))
        nm = S.norms(u, P2)
        assert V.energy_plus(u, P2, cfg) == pytest.approx(
            0.5 * nm["sobolev_s"] ** 2, rel=1e-12
        )
        assert V.energy_plus(u, P2, cfg) > 0

    @pytest.mark.parametrize("seed", range(3))
    def test_gradient_matches_directional_derivative(self, seed):
        grid = S.GridSpec(2, 10.0, 32)
        cfg = V.SolverConfig(p=3.0)
        rng = np.random.default_rng(seed)
        u = S.RealField(grid, rng.standard_normal(grid.shape))
        phi = S.RealField(grid, rng.standard_normal(grid.shape))
        g = V.gradient_plus(u, P2, cfg)
        pairing = grid.cell_volume * np.sum(g.data * phi.data)

        best = np.inf
        prev_err = None
        ratios = []
        for h in (1e-2, 5e-3, 2.5e-3):
            num = (
                V.energy_plus(S.RealField(grid, u.data + h * phi.data), P2, cfg)
                - V.energy_plus(S.RealField(grid, u.data - h * phi.data), P2, cfg)
            ) / (2.0 * h)
            err = abs(num - pairing) / abs(pairing)
            best = min(best, err)
            if prev_err is not None and prev_err > 1e-12:
                ratios.append(prev_err / err)
            prev_err = err
        assert best < 1e-5
        # halving the step divides the central-difference error by ~4
        assert any(r > 3.0 for r in ratios)


class TestPetviashviliStep:
    def test_fixed_point_property(self, ground_state):
        grid, cfg, u, _ = ground_state
        nxt, m_k = V.petviashvili_step(u, P2, cfg)
        assert m_k == pytest.approx(1.0, abs=1e-10)
        assert np.abs(nxt.data - u.data).max() < 1e-9

    def test_stabilizer_homogeneity(self, ground_state):
        grid, cfg, u, _ = ground_state
        _, m1 = V.petviashvili_step(u, P2, cfg)
        _, m2 = V.petviashvili_step(S.RealField(grid, 2.0 * u.data), P2, cfg)
        assert m2 / m1 == pytest.approx(2.0 ** (1.0 - cfg.p), rel=1e-10)

    def test_degenerate_iterate(self):
        grid = S.GridSpec(2, 10.0, 32)
        cfg = V.SolverConfig(p=3.0)
        u = S.RealField(grid, -np.exp(-grid.radius() ** 2))
        with pytest.raises(DegenerateIterateError):
            V.petviashvili_step(u, P2, cfg)


class TestSolve:
    def test_convergence_and_identities(self, ground_state):
        grid, cfg, u, report = ground_state
        assert report.residual_linf < 1e-8
        assert u.data.min() > 0
        nm = S.norms(u, P2)
        assert report.nehari_gap < 1e-6 * nm["sobolev_s"] ** 2
        lp = grid.cell_volume * np.sum(np.maximum(u.data, 0.0) ** (cfg.p + 1))
        expected = (0.5 - 1.0 / (cfg.p + 1.0)) * lp
        assert report.energy == pytest.approx(expected, rel=1e-6)
        assert report.energy > 0

    def test_stabilizer_history_settles(self, ground_state):
        _, _, _, report = ground_state
        tail = report.stabilizer_history[-5:]
        assert all(abs(m - 1.0) < 1e-8 for m in tail)

    def test_amplitude_invariance(self, ground_state):
        grid, cfg, u, _ = ground_state
        u0 = V.initial_field(grid, cfg)
        u2, rep2 = V.solve_ground_state(
            grid, P2,
            V.SolverConfig(p=3.0, tol_residual=1e-10, init="custom-field"),
            u0=S.RealField(grid, 5.0 * u0.data),
        )
        assert rep2.converged
        assert np.abs(u2.data - u.data).max() / u.data.max() < 1e-6

    def test_translation_equivariance(self, ground_state):
        grid, cfg, u, _ = ground_state
        shift = (7, -4)
        u0 = V.initial_field(grid, cfg)
        shifted0 = S.RealField(grid, np.roll(u0.data, shift, axis=(0, 1)))
        u2, rep2 = V.solve_ground_state(
            grid, P2,
            V.SolverConfig(p=3.0, tol_residual=1e-10, init="custom-field"),
            u0=shifted0,
        )
        assert rep2.converged
        back = np.roll(u2.data, (-shift[0], -shift[1]), axis=(0, 1))
        assert np.abs(back - u.data).max() < 1e-8

    def test_custom_field_requires_u0(self):
        grid = S.GridSpec(2, 10.0, 32)
        with pytest.raises(ValueError):
            V.solve_ground_state(
                grid, P2, V.SolverConfig(p=3.0, init="custom-field")
            )

    def test_non_convergence_reported(self):
        grid = S.GridSpec(2, 15.0, 128)
        cfg = V.SolverConfig(p=3.0, tol_residual=1e-14, max_iter=3)
        _, report = V.solve_ground_state(grid, P2, cfg)
        assert not report.converged
        assert report.iterations == 3


class TestMountainPass:
    def test_stationary_point_at_one(self, ground_state):
        grid, cfg, u, _ = ground_state
        prof = V.mountain_pass_profile(u, P2, cfg)
        assert prof.t_star == pytest.approx(1.0, abs=1e-6)
        assert abs(prof.t_argmax - 1.0) < 2.0 / 199  # grid resolution of the fiber

    def test_geometry(self, ground_state):
        grid, cfg, u, _ = ground_state
        prof = V.mountain_pass_profile(u, P2, cfg)
        # positive near zero, negative past the returned witness scale
        assert prof.energies[0] > 0
        norm_sq = S.norms(u, P2)["sobolev_s"] ** 2
        lp = grid.cell_volume * np.sum(np.maximum(u.data, 0.0) ** (cfg.p + 1))
        T = prof.t_negative
        assert 0.5 * T ** 2 * norm_sq - T ** (cfg.p + 1) * lp / (cfg.p + 1) < 0

    def test_nonpositive_rejected(self):
        grid = S.GridSpec(2, 10.0, 32)
        cfg = V.SolverConfig(p=3.0)
        u = S.RealField(grid, -np.ones(grid.shape))
        with pytest.raises(DegenerateIterateError):
            V.mountain_pass_profile(u, P2, cfg)
