import hashlib
import json

import numpy as np
import pytest

from eonmedia import layout as lay
from eonmedia.qrcodec import byte_capacity, check_finders, qr_decode, qr_encode, side


def random_layout(gen: np.random.Generator) -> lay.DiskLayout:
    outer_v = int(gen.integers(1, 3))
    outer_ec = str(gen.choice(list("LMQH")))
    inner_v = int(gen.integers(1, 3))
    inner_ec = str(gen.choice(list("LMQH")))
    cap = byte_capacity(inner_v, inner_ec)
    docs = [
        gen.integers(0, 256, int(gen.integers(0, cap + 1)), dtype=np.uint8).tobytes()
        for _ in range(int(gen.integers(1, 8)))
    ]
    outer = gen.integers(0x20, 0x7F, int(gen.integers(1, 8)), dtype=np.uint8).tobytes()
    return lay.build_layout(outer, docs, outer_v, outer_ec, inner_v, inner_ec)


class TestBuild:
    def test_single_document_broadcast(self):
        layout = lay.build_layout(b"index", [b"only doc"])
        assert set(layout.inner_payloads.values()) == {b"only doc"}
        first = layout.inner_symbol(layout.geometry.slots[0]).modules
        for slot in layout.geometry.slots:
            assert np.array_equal(layout.inner_symbol(slot).modules, first)
        assert layout.first_padded_slot == 1

    def test_dark_module_count_matches_encoding(self):
        payload = b"EONMEDIA INDEX"
        layout = lay.build_layout(payload, [b"a"])
        outer = qr_encode(payload, 2, "H")
        expected = int(outer.modules.sum())
        assert layout.dark_module_count == expected
        assert lay.manifest(layout)["darkModuleCount"] == expected
        assert lay.manifest(layout)["outerVersion"] == 2 and lay.manifest(layout)["outerEcLevel"] == "H"

    def test_row_major_assignment(self):
        docs = [b"doc %d" % i for i in range(5)]
        layout = lay.build_layout(b"x", docs)
        slots = layout.geometry.slots
        assert list(slots) == sorted(slots)
        for k, slot in enumerate(slots):
            assert layout.inner_payloads[slot] == docs[min(k, 4)]

    def test_default_geometry(self):
        layout = lay.build_layout(b"x", [b"y"], pitch=2e-6)
        assert layout.outer_module_size == pytest.approx(42e-6, rel=1e-12)
        assert layout.core_size == pytest.approx(1.05e-3, rel=1e-12)
        assert layout.total_size == pytest.approx((25 + 8) * 42e-6, rel=1e-12)
        # inner symbol fits in one outer module
        assert side(layout.inner_version) * layout.pitch <= layout.outer_module_size

    def test_document_too_long_names_index(self):
        cap = byte_capacity(1, "M")
        with pytest.raises(lay.LayoutError, match="inner document 2"):
            lay.build_layout(b"x", [b"a", b"b", b"z" * (cap + 1)])

    def test_too_many_documents(self):
        with pytest.raises(lay.LayoutError, match="dark outer modules"):
            lay.build_layout(b"x", [b"d"] * 10_000)

    def test_no_documents(self):
        with pytest.raises(lay.LayoutError):
            lay.build_layout(b"x", [])

    def test_payload_slot_invariant(self):
        outer = qr_encode(b"x", 1, "L").modules
        with pytest.raises(lay.LayoutError):
            lay.DiskLayout(outer, 1, "L", {0: b"a"}, 1, "M")


class TestRender:
    def test_empty_layout_all_zero(self):
        empty = lay.DiskLayout(np.zeros((21, 21), dtype=np.uint8), 1, "L", {}, 1, "M")
        mask = lay.render_mask(empty)
        assert mask.bits.shape == ((21 + 8) * 21,) * 2
        assert not mask.bits.any()

    def test_deterministic(self):
        a = lay.render_mask(lay.build_layout(b"idx", [b"p", b"q"]))
        b = lay.render_mask(lay.build_layout(b"idx", [b"p", b"q"]))
        assert a.to_pbm() == b.to_pbm()
        assert a.sha256() == hashlib.sha256(a.to_pbm()).hexdigest()

    def test_quiet_zone_empty(self):
        layout = lay.build_layout(b"idx", [b"p"])
        bits = lay.render_mask(layout).bits
        q = lay.QUIET_ZONE * side(layout.inner_version)
        assert not bits[:q].any() and not bits[-q:].any() and not bits[:, :q].any() and not bits[:, -q:].any()

    def test_round_trip_50_random_layouts(self):
        gen = np.random.default_rng(21)
        for _ in range(50):
            layout = random_layout(gen)
            mask = lay.render_mask(layout)
            outer, inner = lay.sample_layout(mask.bits, layout.geometry)
            assert np.array_equal(outer, layout.outer_modules)
            for slot, matrix in inner.items():
                assert np.array_equal(matrix, layout.inner_symbol(slot).modules)

    def test_tungsten_area_fraction(self):
        gen = np.random.default_rng(22)
        for _ in range(10):
            layout = random_layout(gen)
            bits = lay.render_mask(layout).bits
            geo = layout.geometry
            cells = geo.cells**2
            inner_fraction = np.mean([layout.inner_symbol(s).modules.mean() for s in geo.slots])
            expected = layout.dark_module_count / cells * inner_fraction
            assert bits.mean() == pytest.approx(expected, abs=1e-12)

    def test_single_pixel_locality(self):
        layout = lay.build_layout(b"idx", [b"p", b"q"])
        bits = lay.render_mask(layout).bits.copy()
        geo = layout.geometry
        slot = geo.slots[3]
        r0, c0 = geo.cell_origin(slot)
        bits[r0 + 10, c0 + 12] ^= 1
        _, inner = lay.sample_layout(bits, geo)
        diffs = sum(int(np.count_nonzero(inner[s] != layout.inner_symbol(s).modules)) for s in geo.slots)
        assert diffs == 1

    def test_half_pitch_offset_is_caught(self):
        layout = lay.build_layout(b"idx", [b"p"])
        bits = lay.render_mask(layout).bits
        geo = layout.geometry
        shifted = lay.LayoutGeometry(geo.outer_version, geo.inner_version, geo.slots, geo.quiet_zone, (0.5, 0.5))
        _, inner = lay.sample_layout(bits, shifted)
        reports = [qr_decode(m) for m in inner.values()]
        assert not any(r.ok for r in reports)
        assert all(not all(check_finders(m)) for m in inner.values())

    def test_offset_outside_bitmap(self):
        layout = lay.DiskLayout(
            np.ones((21, 21), dtype=np.uint8), 1, "L", {i: b"" for i in range(441)}, 1, "M", quiet_zone=0
        )
        bits = lay.render_mask(layout).bits
        geo = layout.geometry
        shifted = lay.LayoutGeometry(geo.outer_version, geo.inner_version, geo.slots, 0, (1.0, 0.0))
        with pytest.raises(lay.LayoutError):
            lay.sample_layout(bits, shifted)

    def test_shape_mismatch(self):
        layout = lay.build_layout(b"idx", [b"p"])
        with pytest.raises(lay.LayoutError):
            lay.sample_layout(np.zeros((10, 10)), layout.geometry)


class TestManifest:
    def test_fields_and_hashes(self):
        docs = [b"alpha", b"beta"]
        layout = lay.build_layout(b"idx", docs)
        mask = lay.render_mask(layout)
        man = lay.manifest(layout, mask)
        assert {
            "outerVersion",
            "outerEcLevel",
            "innerVersion",
            "innerEcLevel",
            "pitch_m",
            "darkModuleCount",
            "documents",
        } <= set(man)
        assert man["documents"][0] == {
            "index": layout.geometry.slots[0],
            "bytes_sha256": hashlib.sha256(b"alpha").hexdigest(),
        }
        assert man["documents"][-1]["bytes_sha256"] == hashlib.sha256(b"beta").hexdigest()
        assert man["padding"] == {"policy": "repeat-last", "firstPaddedSlot": 2}
        assert man["mask_sha256"] == mask.sha256()

    def test_json_deterministic(self):
        texts = {lay.manifest_json(lay.manifest(lay.build_layout(b"i", [b"d"]))) for _ in range(2)}
        assert len(texts) == 1
        json.loads(texts.pop())

    def test_geometry_from_manifest(self):
        layout = lay.build_layout(b"idx", [b"p"])
        man = json.loads(lay.manifest_json(lay.manifest(layout)))
        assert lay.geometry_from_manifest(man) == layout.geometry

    def test_geometry_from_bad_manifest(self):
        layout = lay.build_layout(b"idx", [b"p"])
        man = lay.manifest(layout)
        man["darkModuleCount"] += 1
        with pytest.raises(lay.LayoutError):
            lay.geometry_from_manifest(man)
        with pytest.raises(lay.LayoutError):
            lay.geometry_from_manifest({"documents": []})
