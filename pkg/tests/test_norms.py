"""Norm computations: Lp, dyadic blocks, Besov characterizations, smoothing."""

import math

import numpy as np
import pytest

from orthoflow.norms import (
    BesovSpec,
    TimeGrid,
    bernstein_check,
    besov_norm,
    default_tgrid,
    heat_besov_report,
    heat_smoothing_fit,
    littlewood_paley,
    lp_norm,
)
from orthoflow.spectral import (
    SpectralVectorField,
    field_from_modes,
    heat_semigroup,
    make_grid,
)

from conftest import random_field

COS_L2 = math.sqrt(0.5)                 # mean of cos^2 is 1/2
COS_L3 = (4.0 / (3.0 * math.pi)) ** (1.0 / 3.0)   # closed-form mean of |cos|^3


class TestLpNorm:
    def test_cosine_l2(self):
        g = make_grid((16, 4, 4))
        f = field_from_modes(g, {(1, (1, 0, 0)): 0.5})
        assert lp_norm(f, 2) == pytest.approx(COS_L2, rel=1e-10)
        assert lp_norm(f, 2) == pytest.approx(0.7071068, rel=1e-6)

    def test_cosine_l3(self):
        g = make_grid((16, 4, 4))
        f = field_from_modes(g, {(1, (1, 0, 0)): 0.5})
        assert lp_norm(f, 3, oversample=8) == pytest.approx(COS_L3, rel=1e-6)
        assert lp_norm(f, 3, oversample=8) == pytest.approx(0.751498, rel=1e-5)

    def test_l2_matches_parseval(self, grid16):
        f = random_field(grid16, kmax=5, seed=61)
        assert lp_norm(f, 2) == pytest.approx(f.l2(), rel=1e-10)

    @pytest.mark.parametrize("p", [2, 3, math.inf])
    def test_homogeneity(self, grid16, p):
        f = random_field(grid16, kmax=5, seed=63)
        scaled = SpectralVectorField(grid16, -2.5 * f.coeffs)
        assert lp_norm(scaled, p) == pytest.approx(2.5 * lp_norm(f, p), rel=1e-12)

    def test_p_below_one_rejected(self, grid16):
        f = random_field(grid16, kmax=3, seed=65)
        with pytest.raises(ValueError, match="p must be"):
            lp_norm(f, 0.5)

    def test_component_sups_add_in_quadrature(self):
        # components peaking at x=0 in different slots: |u|_inf^2 = sum of sups^2
        g = make_grid((16, 16, 16))
        f = field_from_modes(
            g,
            {(1, (0, 2, 3)): 0.5, (2, (4, 0, 1)): 0.7, (3, (1, 5, 0)): 0.2},
        )
        sup = lp_norm(f, math.inf, oversample=2)
        assert sup == pytest.approx(math.sqrt(1.0 + 1.4 ** 2 + 0.4 ** 2), rel=1e-12)


class TestLittlewoodPaley:
    def test_partition_of_unity(self, grid16):
        f = random_field(grid16, kmax=6, seed=71)
        total = np.zeros_like(f.coeffs)
        for j in range(-3, 7):
            total += littlewood_paley(f, j).coeffs
        defect = np.max(np.abs(total - f.coeffs))
        assert defect <= 1e-10 * f.amplitude()

    def test_single_mode_contributing_blocks(self, grid16):
        f = field_from_modes(grid16, {(1, (0, 3, 4)): 1.0})  # |k| = 5
        nonzero = [
            j for j in range(-2, 8) if littlewood_paley(f, j).amplitude() > 0
        ]
        assert nonzero == [2, 3]

    def test_zero_field_maps_to_zero(self, grid16):
        from orthoflow.spectral import zero_field

        assert littlewood_paley(zero_field(grid16), 2).amplitude() == 0.0

    def test_block_supported_in_annulus(self, grid16):
        f = random_field(grid16, kmax=7, seed=73)
        j = 2
        block = littlewood_paley(f, j)
        nz = np.abs(block.coeffs).max(axis=0) > 0
        radii = np.sqrt(grid16.k_sq[nz])
        assert np.all(radii >= 2.0 ** (j - 1) - 1e-12)
        assert np.all(radii <= 2.0 ** (j + 1) + 1e-12)


class TestTimeGrid:
    def test_geometric_contains_anchor(self):
        tg = TimeGrid.geometric(1e-4, 10.0, 32, anchor=0.0123)
        assert np.any(np.isclose(tg.points, 0.0123, rtol=1e-12))
        assert np.all(np.diff(tg.points) > 0)
        assert tg.t_min <= 1e-4 and tg.t_max >= 10.0

    def test_invalid_bounds_rejected(self):
        with pytest.raises(ValueError):
            TimeGrid.geometric(1.0, 0.5)

    def test_anchor_must_be_present(self):
        with pytest.raises(ValueError, match="anchor"):
            TimeGrid(points=np.array([1.0, 2.0, 4.0]), anchor=3.0)


class TestBesovHeat:
    @pytest.mark.parametrize("k,ksq", [((1, 1, 0), 2), ((0, 1, 2), 5), ((2, 3, 0), 13)])
    def test_single_mode_closed_form(self, k, ksq):
        g = make_grid((16, 16, 16))
        f = field_from_modes(g, {(1, k): 0.5})  # amplitude-1 cosine
        got = besov_norm(f, BesovSpec(-1, math.inf, math.inf, "heat"))
        expected = math.sqrt(1.0 / (2 * ksq)) * math.exp(-0.5)
        assert got == pytest.approx(expected, rel=1e-6)

    def test_mode_ksq2_value(self):
        g = make_grid((16, 16, 16))
        f = field_from_modes(g, {(3, (1, 1, 0)): 0.5})
        got = besov_norm(f, BesovSpec(-1, math.inf, math.inf, "heat"))
        assert got == pytest.approx(0.303265, rel=1e-5)

    def test_heat_requires_negative_s(self):
        with pytest.raises(ValueError, match="s < 0"):
            BesovSpec(0.5, math.inf, 2, "heat")

    def test_tgrid_coverage_enforced(self, grid16):
        f = random_field(grid16, kmax=5, seed=81)
        bad = TimeGrid.geometric(1.0, 10.0, 32)  # misses the small scales
        with pytest.raises(ValueError, match="not covering"):
            besov_norm(f, BesovSpec(-1, math.inf, 2, "heat"), tgrid=bad)

    def test_q2_tails_are_small(self, grid16):
        f = random_field(grid16, kmax=5, seed=83)
        rep = heat_besov_report(f, BesovSpec(-1, math.inf, 2, "heat"), oversample=2)
        assert rep.tail_low + rep.tail_high <= 0.01 * rep.value ** 2

    def test_q2_matches_independent_time_quadrature(self, grid16):
        # single-component field: the s=-1, p=inf, q=2 norm squared is the
        # time integral of the squared sup of the heat flow
        f = random_field(grid16, kmax=4, seed=85)
        coeffs = f.coeffs.copy()
        coeffs[1:] = 0.0
        f = SpectralVectorField(grid16, coeffs)
        b = besov_norm(f, BesovSpec(-1, math.inf, 2, "heat"), oversample=4)
        ts = np.geomspace(1e-4, 50.0, 600)
        sups = np.array(
            [lp_norm(heat_semigroup(f, t), math.inf, oversample=4) for t in ts]
        )
        direct = np.sqrt(np.trapezoid(sups ** 2, ts))
        assert b == pytest.approx(direct, rel=0.01)

    def test_homogeneity(self, grid16):
        f = random_field(grid16, kmax=4, seed=87)
        scaled = SpectralVectorField(grid16, 3.0 * f.coeffs)
        spec = BesovSpec(-1, math.inf, 2, "heat")
        a = besov_norm(scaled, spec, oversample=2)
        b = besov_norm(f, spec, oversample=2)
        assert a == pytest.approx(3.0 * b, rel=1e-10)


class TestBesovDyadic:
    def test_single_mode_matches_profile(self):
        g = make_grid((16, 16, 16))
        from orthoflow.spectral import DyadicProfile

        f = field_from_modes(g, {(1, (0, 3, 4)): 0.5})  # |k| = 5, amplitude 1
        prof = DyadicProfile()
        got = besov_norm(f, BesovSpec(-1, math.inf, math.inf, "dyadic"))
        expected = max(
            2.0 ** -j * float(prof.chi(5.0 / 2 ** j)) for j in (2, 3)
        )
        assert got == pytest.approx(expected, rel=1e-6)

    def test_equivalence_bracket_small_corpus(self, grid16):
        for seed in (90, 91, 92, 93, 94):
            f = random_field(grid16, kmax=5, seed=seed)
            dy = besov_norm(f, BesovSpec(-1, math.inf, math.inf, "dyadic"), oversample=2)
            he = besov_norm(f, BesovSpec(-1, math.inf, math.inf, "heat"), oversample=2)
            assert 0.1 <= dy / he <= 10.0


class TestEmbeddingDirections:
    """Inclusion-chain constants measured once on the frozen corpus and
    asserted thereafter: B^-1_inf,inf <= 0.5 B^-1/2_{6,2} <= 0.25 L3, and
    B^-1_inf,2 <= 0.75 L2 for fields of two coordinates."""

    def test_critical_chain(self, grid16):
        for seed in (101, 102, 103):
            f = random_field(grid16, kmax=6, seed=seed)
            binf = besov_norm(f, BesovSpec(-1, math.inf, math.inf, "heat"), oversample=2)
            bp2 = besov_norm(f, BesovSpec(-0.5, 6, 2, "dyadic"))
            l3 = lp_norm(f, 3)
            assert binf <= 0.5 * bp2
            assert bp2 <= 0.5 * l3

    def test_planar_l2_controls_binf2(self, grid16):
        for seed in (111, 112, 113):
            f = random_field(grid16, kmax=6, seed=seed)
            coeffs = f.coeffs.copy()
            coeffs[1:] = 0.0
            coeffs[0][grid16.k_axis[0] != 0, :, :] = 0.0
            f2 = SpectralVectorField(grid16, coeffs)
            b = besov_norm(f2, BesovSpec(-1, math.inf, 2, "heat"), oversample=2)
            assert b <= 0.75 * f2.l2()


class TestBernstein:
    def test_single_mode_ratio(self):
        g = make_grid((32, 32, 4))
        f = field_from_modes(g, {(1, (3, 4, 0)): 0.5})  # radius 5
        rep = bernstein_check(f, (5, 5), p=2, q=3, effective_dim=2, oversample=8)
        expected = COS_L3 / (5.0 ** (1.0 / 3.0) * COS_L2)
        assert rep.ratio == pytest.approx(expected, rel=1e-5)

    def test_q_equals_p_gives_one(self, grid16):
        f = field_from_modes(grid16, {(2, (0, 2, 1)): 1.0})
        rep = bernstein_check(f, (1, 6), p=3, q=3, oversample=8)
        assert rep.ratio == pytest.approx(1.0, rel=1e-12)

    def test_support_outside_band_rejected(self, grid16):
        f = field_from_modes(grid16, {(1, (0, 3, 4)): 1.0})
        with pytest.raises(ValueError, match="support outside band"):
            bernstein_check(f, (6, 7), p=2, q=3)

    def test_q_below_p_rejected(self, grid16):
        f = field_from_modes(grid16, {(1, (0, 3, 4)): 1.0})
        with pytest.raises(ValueError, match="q >= p"):
            bernstein_check(f, (4, 6), p=3, q=2)


class TestHeatSmoothingFit:
    def test_contraction_case_flat(self):
        fit = heat_smoothing_fit((3, 32), s=0, p=2, q=2, trials=1)
        assert abs(fit.slope - 0.0) <= 0.1
        assert fit.slope <= fit.standard_rate + 0.1

    def test_derivative_case(self):
        fit = heat_smoothing_fit((3, 32), s=4.0 / 3.0, p=3, q=3, trials=1)
        assert abs(fit.slope - (-2.0 / 3.0)) <= 0.1

    def test_p_to_q_gain(self):
        fit = heat_smoothing_fit((3, 32), s=0, p=2, q=math.inf, trials=1)
        assert abs(fit.slope - (-0.75)) <= 0.1

    def test_q_below_p_rejected(self):
        with pytest.raises(ValueError, match="q >= p"):
            heat_smoothing_fit((3, 32), s=0, p=3, q=2)

    def test_narrow_band_rejected(self):
        with pytest.raises(ValueError, match="kmax >= 8 kmin"):
            heat_smoothing_fit((4, 8), s=0, p=2, q=2)


class TestDefaultTgrid:
    def test_spans_support_scales(self, grid16):
        f = field_from_modes(grid16, {(1, (0, 3, 4)): 1.0})
        tg = default_tgrid(f)
        assert tg.t_min <= 0.25 / 25.0
        assert tg.t_max >= 4.0 / 25.0
