import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eonmedia import optics as op
from optics_oracle import multiple_beam_reflection, random_stack

AIR = op.OpticalLayer("air", 1.0)
WL = 550e-9


class TestReflectance:
    def test_no_interface(self):
        assert op.reflectance(op.LayerStack(AIR, (), op.OpticalLayer("vac", 1.0))) == 0.0

    @pytest.mark.parametrize("ns", [1.5, 2.0, 4.08 + 0.028j, 3.5 + 2.72j])
    def test_single_interface_fresnel(self, ns):
        stack = op.LayerStack(AIR, (), op.OpticalLayer("s", ns))
        assert op.reflectance(stack) == pytest.approx(abs((1 - ns) / (1 + ns)) ** 2, abs=1e-15)

    def test_nitride_on_silicon_matches_multiple_beam(self):
        table = op.load_index_table()
        stack = op.LayerStack(
            AIR,
            (op.OpticalLayer("SiN", op.interpolate(table, "Si3N4", WL), 338e-9),),
            op.OpticalLayer("Si", op.interpolate(table, "Si", WL)),
        )
        assert op.reflectance(stack) == pytest.approx(abs(multiple_beam_reflection(stack)) ** 2, abs=1e-9)

    def test_random_non_absorbing_against_multiple_beam(self):
        gen = np.random.default_rng(5)
        for _ in range(100):
            stack = random_stack(gen, n_range=(1.0, 3.0))
            oracle = abs(multiple_beam_reflection(stack)) ** 2
            assert op.reflectance(stack) == pytest.approx(oracle, abs=1e-9)

    def test_absorbing_multiple_beam(self):
        gen = np.random.default_rng(6)
        for _ in range(50):
            stack = random_stack(gen, absorbing=True, n_range=(1.0, 3.0))
            assert op.reflectance(stack) == pytest.approx(abs(multiple_beam_reflection(stack)) ** 2, abs=1e-9)

    def test_energy_conservation(self):
        gen = np.random.default_rng(7)
        for _ in range(100):
            stack = random_stack(gen)
            assert op.reflectance(stack) + op.transmittance(stack) == pytest.approx(1.0, abs=1e-9)

    def test_bounds_on_random_absorbing_stacks(self):
        gen = np.random.default_rng(8)
        for _ in range(1000):
            r = op.reflectance(random_stack(gen, absorbing=True))
            assert 0.0 <= r <= 1.0

    def test_thick_absorber_acts_as_substrate(self):
        w = 3.5 + 2.72j
        stack = op.LayerStack(AIR, (op.OpticalLayer("W", w, 5e-6),), op.OpticalLayer("Si", 4.08))
        assert op.reflectance(stack) == pytest.approx(abs((1 - w) / (1 + w)) ** 2, abs=1e-12)

    @given(
        st.floats(1.0, 5.0),
        st.floats(1.0, 5.0),
        st.floats(1.2, 3.0),
        st.integers(1, 4),
        st.floats(400e-9, 800e-9),
    )
    def test_half_wave_layer_is_invisible(self, na, ns, n, order, wl):
        d = order * wl / (2 * n)
        bare = op.LayerStack(op.OpticalLayer("a", na), (), op.OpticalLayer("s", ns), wl)
        coated = op.LayerStack(op.OpticalLayer("a", na), (op.OpticalLayer("h", n, d),), op.OpticalLayer("s", ns), wl)
        assert op.reflectance(coated) == pytest.approx(op.reflectance(bare), abs=1e-9)

    @given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.95))
    def test_subdivision_invariance(self, seed, split):
        gen = np.random.default_rng(seed)
        stack = random_stack(gen, absorbing=True)
        if not stack.layers:
            return
        i = int(gen.integers(0, len(stack.layers)))
        layer = stack.layers[i]
        a = op.OpticalLayer(layer.name, layer.n, layer.thickness * split)
        b = op.OpticalLayer(layer.name, layer.n, layer.thickness * (1 - split))
        split_stack = op.LayerStack(
            stack.ambient, stack.layers[:i] + (a, b) + stack.layers[i + 1 :], stack.substrate, stack.wavelength
        )
        assert op.reflectance(split_stack) == pytest.approx(op.reflectance(stack), abs=1e-12)

    def test_reflectance_vs_thickness_matches_scalar(self):
        pair = op.design_stack_pair()
        ds = np.linspace(150e-9, 300e-9, 7)
        vec = op.reflectance_vs_thickness(pair.metal, pair.metal_top, ds)
        for d, v in zip(ds, vec):
            assert v == pytest.approx(op.reflectance(pair.metal.with_thickness(pair.metal_top, float(d))), abs=1e-15)


class TestContrast:
    def test_identical(self):
        pair = op.design_stack_pair()
        assert op.contrast(pair.bare, pair.bare) == 0.0

    def test_symmetric(self):
        pair = op.design_stack_pair()
        assert op.contrast(pair.bare, pair.metal) == op.contrast(pair.metal, pair.bare)

    def test_design_stack_golden(self):
        pair = op.design_stack_pair()
        value = op.contrast(pair.bare, pair.metal)
        assert value > 0.1
        # golden for the bundled index table
        assert value == pytest.approx(0.11378, abs=5e-5)
        assert op.reflectance(pair.bare) > op.reflectance(pair.metal)

    def test_wavelength_mismatch(self):
        pair = op.design_stack_pair()
        other = op.LayerStack(pair.metal.ambient, pair.metal.layers, pair.metal.substrate, 600e-9)
        with pytest.raises(ValueError):
            op.contrast(pair.bare, other)


class TestOptimizer:
    def test_constant_contrast_returns_lower_corner(self):
        glass = op.OpticalLayer("glass", 1.5)

        def build(d1, d2):
            bare = op.LayerStack(AIR, (op.OpticalLayer("gap", 1.0, d1),), glass)
            metal = op.LayerStack(AIR, (op.OpticalLayer("gap", 1.0, d2),), op.OpticalLayer("W", 3.5 + 2.72j))
            return bare, metal

        (d1, d2), _ = op.optimize_thicknesses(build, ((100e-9, 200e-9), (50e-9, 80e-9)), grid=11)
        assert (d1, d2) == (100e-9, 50e-9)

    def test_quarter_wave_antireflection(self):
        si = op.OpticalLayer("Si", 4.08)
        reference = op.LayerStack(AIR, (), si)

        def build_single(d1, d2):
            coated = op.LayerStack(AIR, (op.OpticalLayer("ar", 2.0, d1),), si)
            return coated, reference

        (d1, d2), value = op.optimize_thicknesses(build_single, ((40e-9, 100e-9), (1e-9, 2e-9)), grid=41)
        assert d1 == pytest.approx(68.75e-9, abs=1e-12)
        assert d2 == 1e-9
        for k in (1, 2):
            (dk, _), _ = op.optimize_thicknesses(
                build_single, ((68.75e-9 * (2 * k + 1) - 30e-9, 68.75e-9 * (2 * k + 1) + 30e-9), (1e-9, 2e-9)), grid=41
            )
            assert dk == pytest.approx(68.75e-9 * (2 * k + 1), abs=1e-12)

    def test_dominates_design(self):
        build = op.design_builder()
        (bottom, top), value = op.optimize_thicknesses(build, ((100e-9, 500e-9), (100e-9, 400e-9)))
        design = op.contrast(*build(op.DESIGN_BOTTOM_NITRIDE, op.DESIGN_TOP_NITRIDE))
        assert value >= design
        assert value == pytest.approx(op.contrast(*build(bottom, top)), abs=1e-15)
        assert 100e-9 <= bottom <= 500e-9 and 100e-9 <= top <= 400e-9

    def test_bad_bounds(self):
        with pytest.raises(ValueError):
            op.optimize_thicknesses(op.design_builder(), ((5e-7, 1e-7), (1e-7, 4e-7)))
        with pytest.raises(ValueError):
            op.optimize_thicknesses(op.design_builder(), ((1e-7, 5e-7), (1e-7, 4e-7)), grid=1)


class TestIndexTable:
    def test_exact_sample(self):
        table = op.load_index_table()
        assert op.interpolate(table, "Si", 550e-9) == complex(4.08, 0.028)

    def test_midpoint(self):
        table = op.load_index_table()
        mid = op.interpolate(table, "W", 525e-9)
        assert mid.real == pytest.approx((3.44 + 3.50) / 2, abs=1e-12)
        assert mid.imag == pytest.approx((2.66 + 2.72) / 2, abs=1e-12)

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("material,wavelength_nm,n_real,n_imag\nX,500,1.23456789,0.1\nX,600,1.5,0\n")
        table = op.load_index_table(path)
        assert op.interpolate(table, "X", 500e-9) == complex(1.23456789, 0.1)

    @pytest.mark.parametrize(
        "body, line",
        [
            ("X,500,1.2\n", "line 2"),
            ("X,500,abc,0\n", "line 2"),
            ("X,500,1,0\nX,600,1,0\nY,500,1,0,5\n", "line 4"),
        ],
    )
    def test_malformed_rows_report_line(self, tmp_path, body, line):
        path = tmp_path / "bad.csv"
        path.write_text("material,wavelength_nm,n_real,n_imag\n" + body)
        with pytest.raises(op.IndexTableError, match=line):
            op.load_index_table(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("name,wl,n,k\n")
        with pytest.raises(op.IndexTableError, match="line 1"):
            op.load_index_table(path)

    def test_out_of_range_and_unknown(self):
        table = op.load_index_table()
        with pytest.raises(op.IndexTableError, match="outside"):
            op.interpolate(table, "Si", 900e-9)
        with pytest.raises(op.IndexTableError, match="unknown material"):
            op.interpolate(table, "Gold", 550e-9)

    def test_layer_validation(self):
        with pytest.raises(ValueError):
            op.OpticalLayer("x", 1.5, -1e-9)
        with pytest.raises(ValueError):
            op.OpticalLayer("x", 1.5 - 0.1j, 1e-9)
