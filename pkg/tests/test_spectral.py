"""Periodic-box discretization: transforms, multipliers, norms, serialization."""

import numpy as np
import pytest

from mixlap.errors import GridMismatchError
from mixlap.params import KernelParams
from mixlap import spectral as S

P2 = KernelParams(2, 0.5)
GRID = S.GridSpec(2, 10.0, 64)


def random_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    return S.RealField(grid, rng.standard_normal(grid.shape))


class TestGridSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            S.GridSpec(1, 10.0, 64)   # n = 1 not supported by the solver layer
        with pytest.raises(ValueError):
            S.GridSpec(2, -1.0, 64)
        with pytest.raises(ValueError):
            S.GridSpec(2, 10.0, 8)    # below minimum
        with pytest.raises(ValueError):
            S.GridSpec(2, 10.0, 48)   # not a power of two

    def test_geometry(self):
        assert GRID.spacing == pytest.approx(20.0 / 64)
        ax = GRID.axis()
        assert ax[0] == pytest.approx(-10.0)
        assert len(ax) == 64
        assert GRID.cell_volume == pytest.approx(GRID.spacing ** 2)

    def test_field_shape_enforced(self):
        with pytest.raises(GridMismatchError):
            S.RealField(GRID, np.zeros((64, 32)))

    def test_field_finite_enforced(self):
        data = np.zeros(GRID.shape)
        data[0, 0] = np.inf
        with pytest.raises(ValueError):
            S.RealField(GRID, data)


class TestTransforms:
    def test_round_trip(self):
        f = random_field(GRID)
        back = S.inverse(S.forward(f))
        assert np.abs(back.data - f.data).max() < 1e-12

    def test_constant_field(self):
        f = S.RealField(GRID, np.full(GRID.shape, 2.5))
        c = S.forward(f).coeffs
        assert c[0, 0] == pytest.approx(2.5)
        c[0, 0] = 0.0
        assert np.abs(c).max() < 1e-13

    def test_single_harmonic_modes(self):
        X, _ = GRID.meshgrid()
        f = S.RealField(GRID, np.cos(2.0 * np.pi * X / (2.0 * GRID.L)))
        c = S.forward(f).coeffs
        mask = np.abs(c) > 1e-12
        assert mask.sum() == 2
        assert mask[1, 0] and mask[-1, 0]

    def test_conjugate_symmetry(self):
        c = S.forward(random_field(GRID, 5))
        assert c.is_conjugate_symmetric()
        broken = S.SpectralCoeffs(GRID, c.coeffs + 0j)
        broken.coeffs[3, 7] += 0.5
        assert not broken.is_conjugate_symmetric()


class TestOperators:
    def test_harmonic_eigenvalue(self):
        X, _ = GRID.meshgrid()
        xi = 3.0 / (2.0 * GRID.L)
        f = S.RealField(GRID, np.cos(2.0 * np.pi * xi * X))
        w_sq = (2.0 * np.pi * xi) ** 2
        lam = w_sq + w_sq ** P2.s
        out = S.apply_operator(f, P2)
        assert np.abs(out.data - lam * f.data).max() / lam < 1e-12
        out_id = S.apply_operator(f, P2, include_identity=True)
        assert np.abs(out_id.data - (lam + 1) * f.data).max() / lam < 1e-12

    def test_symbol_midpoint_value(self):
        assert S.operator_symbol(1.0, 0.5) == pytest.approx(2.0)

    def test_linearity(self):
        f, g = random_field(GRID, 1), random_field(GRID, 2)
        both = S.apply_operator(S.RealField(GRID, f.data + g.data), P2)
        sep = S.apply_operator(f, P2).data + S.apply_operator(g, P2).data
        assert np.abs(both.data - sep).max() < 1e-10

    def test_resolvent_inverts(self):
        f = random_field(GRID, 3)
        back = S.apply_operator(S.apply_resolvent(f, P2), P2, include_identity=True)
        assert np.abs(back.data - f.data).max() / np.abs(f.data).max() < 1e-10

    def test_resolvent_zero_mode(self):
        f = S.RealField(GRID, np.ones(GRID.shape))
        out = S.apply_resolvent(f, P2)
        assert np.abs(out.data - 1.0).max() < 1e-12

    def test_translation_equivariance(self):
        f = random_field(GRID, 4)
        shifted = S.RealField(GRID, np.roll(f.data, (5, -3), axis=(0, 1)))
        a = S.apply_operator(shifted, P2).data
        b = np.roll(S.apply_operator(f, P2).data, (5, -3), axis=(0, 1))
        assert np.abs(a - b).max() < 1e-10

    def test_resolvent_matches_quadrature_kernel(self, monkeypatch, tmp_path):
        # spike response versus the kernels-module Green function: the
        # spectral resolvent uses the angular wavenumber w = 2 pi xi, so
        # G(x) = (2 pi)^{-n} K(x / (2 pi))
        monkeypatch.setenv("MIXLAP_CACHE_DIR", str(tmp_path))
        from mixlap import kernels as K

        grid = S.GridSpec(2, 20.0, 256)
        spike = np.zeros(grid.shape)
        spike[0, 0] = 1.0 / grid.cell_volume
        G = S.apply_resolvent(S.RealField(grid, spike), P2)
        r = grid.radius(center=(-grid.L, -grid.L))
        for target in (0.5, 1.0, 2.0, 5.0):
            idx = np.unravel_index(np.argmin(np.abs(r - target)), r.shape)
            pred = (2 * np.pi) ** -2 * K.bessel_kernel(r[idx] / (2 * np.pi), P2)
            assert G.data[idx] == pytest.approx(pred, rel=0.02)


class TestNorms:
    def test_zero_field(self):
        nm = S.norms(S.RealField(GRID, np.zeros(GRID.shape)), P2, p=3)
        assert all(v == 0.0 for v in nm.values())

    def test_parseval(self):
        f = random_field(GRID, 6)
        nm = S.norms(f, P2)
        direct = GRID.cell_volume * np.sum(f.data ** 2)
        assert nm["l2"] ** 2 == pytest.approx(direct, rel=1e-12)

    def test_single_harmonic_closed_form(self):
        X, _ = GRID.meshgrid()
        xi = 2.0 / (2.0 * GRID.L)
        A = 1.7
        f = S.RealField(GRID, A * np.cos(2.0 * np.pi * xi * X))
        nm = S.norms(f, P2)
        vol = (2.0 * GRID.L) ** 2
        w_sq = (2.0 * np.pi * xi) ** 2
        # two modes of amplitude A/2 each
        assert nm["l2"] ** 2 == pytest.approx(vol * A ** 2 / 2.0, rel=1e-12)
        assert nm["h1_seminorm"] ** 2 == pytest.approx(
            vol * A ** 2 / 2.0 * w_sq, rel=1e-12
        )
        assert nm["hs_seminorm"] ** 2 == pytest.approx(
            vol * A ** 2 / 2.0 * w_sq ** P2.s, rel=1e-12
        )

    def test_sobolev_composition(self):
        f = random_field(GRID, 7)
        nm = S.norms(f, P2)
        assert nm["sobolev_s"] ** 2 == pytest.approx(
            nm["l2"] ** 2 + nm["h1_seminorm"] ** 2 + nm["hs_seminorm"] ** 2, rel=1e-12
        )

    def test_symbol_domination(self):
        # w^{2s} <= 1 + w^2 pointwise, hence hs^2 <= l2^2 + h1^2
        for seed in range(5):
            nm = S.norms(random_field(GRID, seed), P2)
            assert nm["hs_seminorm"] ** 2 <= nm["l2"] ** 2 + nm["h1_seminorm"] ** 2

    def test_lp_requires_p_ge_1(self):
        with pytest.raises(ValueError):
            S.norms(random_field(GRID), P2, p=0.5)

    def test_inner_product_consistency(self):
        f = random_field(GRID, 8)
        nm = S.norms(f, P2)
        assert S.inner_product_s(f, f, P2) == pytest.approx(
            nm["sobolev_s"] ** 2, rel=1e-12
        )
        with pytest.raises(GridMismatchError):
            S.inner_product_s(f, random_field(S.GridSpec(2, 10.0, 32)), P2)


class TestNonlinearity:
    def test_pointwise_power(self):
        f = random_field(GRID, 9)
        out = S.positive_part_power(f, 3)
        assert np.array_equal(out.data, np.maximum(f.data, 0.0) ** 3)

    def test_dealias_matches_on_bandlimited(self):
        # a positive band-limited field: cubing exactly representable after padding
        X, Y = GRID.meshgrid()
        f = S.RealField(GRID, 2.0 + np.cos(np.pi * X / GRID.L) * np.cos(np.pi * Y / GRID.L))
        a = S.positive_part_power(f, 3).data
        b = S.positive_part_power(f, 3, dealias=True).data
        assert np.abs(a - b).max() < 1e-10

    def test_dealias_rejects_non_integer(self):
        with pytest.raises(ValueError):
            S.positive_part_power(random_field(GRID), 2.5, dealias=True)


class TestSerialization:
    def test_binary_round_trip(self, tmp_path):
        f = random_field(GRID, 10)
        path = tmp_path / "field.bin"
        S.write_field(path, f)
        back = S.read_field(path)
        assert back.grid == GRID
        assert np.array_equal(back.data, f.data)

    def test_header_contents(self, tmp_path):
        import json

        f = random_field(GRID, 11)
        path = tmp_path / "field.bin"
        S.write_field(path, f)
        header = json.loads((tmp_path / "field.bin.json").read_text())
        assert header == {"n": 2, "L": 10.0, "N": 64}

    def test_axis_slice_csv(self, tmp_path):
        f = random_field(GRID, 12)
        path = tmp_path / "slice.csv"
        S.axis_slice_csv(path, f, axis=0)
        rows = np.loadtxt(path, delimiter=",", skiprows=1)
        assert rows.shape == (64, 2)
        assert np.allclose(rows[:, 1], f.data[:, 32])
