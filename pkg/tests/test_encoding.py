"""Codec tests: integer and rational codes, scaled real packing, snapshot
encoding, virtual vertices."""

from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polymeet import fixtures as fx
from polymeet.encoding import (
    BitString,
    CodecError,
    UnsupportedValueError,
    decode_rational,
    decode_snapshot,
    decode_uint,
    encode_rational,
    encode_snapshot,
    encode_uint,
    pack_reals,
    unpack_reals,
    virtual_vertex,
    VirtualVertex,
    VirtualVertexTie,
)
from polymeet.geometry import Point, fully_visible, visibility_region
from polymeet.scalars import sgn


def test_uint_examples():
    assert str(encode_uint(0)) == "1"
    assert str(encode_uint(5)) == "000001"


def test_uint_roundtrip_exhaustive():
    for n in range(65):
        bits = encode_uint(n)
        val, pos = decode_uint(bits)
        assert val == n and pos == len(bits)


def test_uint_malformed():
    with pytest.raises(CodecError):
        decode_uint(BitString("0000"))


def test_rational_worked_example_5_3():
    # the published worked example: 5/3 becomes fractional bits 10000010001
    assert str(encode_rational(F(5, 3))) == "10000010001"
    val, pos = decode_rational(encode_rational(F(5, 3)))
    assert val == F(5, 3)


def test_rational_roundtrip_randomized():
    import random

    rng = random.Random(7)
    for _ in range(300):
        p = rng.randint(-1000, 1000)
        q = rng.randint(1, 1000)
        x = F(p, q)
        bits = encode_rational(x)
        val, pos = decode_rational(bits)
        assert val == x and pos == len(bits)


def test_self_delimiting_with_garbage():
    for x in (F(5, 3), F(0, 1), F(-7, 2)):
        bits = encode_rational(x)
        noisy = bits + BitString("10110011101")
        val, pos = decode_rational(noisy)
        assert val == x and pos == len(bits)
    bits = encode_uint(9)
    val, pos = decode_uint(bits + BitString("0101"))
    assert val == 9 and pos == len(bits)


# --- packing -------------------------------------------------------------------


def test_pack_empty():
    bits = pack_reals([], 0)
    assert str(bits) == "0"
    vals, lam = unpack_reals(bits)
    assert vals == [] and lam == 0
    vals, lam = unpack_reals(pack_reals([], 3))
    assert vals == [] and lam == 3


def test_pack_layout_shift_halves_value():
    for vals in ([F(1, 2)], [F(3, 4), F(-5, 8)], [F(0)]):
        for lam in (0, 1, 5):
            b1 = pack_reals(vals, lam)
            b2 = pack_reals(vals, lam + 1)
            assert b2.value() == b1.value() / 2
            assert unpack_reals(b1)[0] == unpack_reals(b2)[0]


def dyadics():
    return st.builds(
        lambda num, k: F(num, 1 << k),
        st.integers(min_value=-4096, max_value=4096),
        st.integers(min_value=0, max_value=12),
    )


@settings(max_examples=300, deadline=None)
@given(st.lists(dyadics(), max_size=8), st.integers(min_value=0, max_value=16))
def test_pack_roundtrip_property(values, lam):
    bits = pack_reals(values, lam)
    got, got_lam = unpack_reals(bits)
    assert got == list(values)
    assert got_lam == lam


def test_pack_rejects_non_dyadic():
    with pytest.raises(UnsupportedValueError):
        pack_reals([F(1, 3)], 0)


def test_packed_value_below_scale():
    bits = pack_reals([F(1, 2), F(7, 8)], 5)
    assert bits.value() < F(1, 32)


def test_hex_roundtrip():
    for s in ("", "1", "10110011101", "0001"):
        b = BitString(s)
        assert BitString.from_hex(b.to_hex()) == b


# --- snapshot codec ---------------------------------------------------------------


def square_region():
    P = fx.square_polygon()
    return P, visibility_region(P, Point(F(1), F(1)))


def test_snapshot_all_defined_roundtrip():
    P, region = square_region()
    enc, bits = encode_snapshot(region, 0, 1)
    assert all(e.defined for e in enc.entries)
    dec, pos = decode_snapshot(bits)
    assert pos == len(bits)
    assert dec == enc
    # garbage after the code does not change the decode
    dec2, pos2 = decode_snapshot(bits + BitString("110101"))
    assert dec2 == enc and pos2 == pos
    # frame normalization: ref_a at origin, ref_b at (1, 0)
    assert enc.entries[0].point == Point(F(0), F(0))
    assert enc.entries[1].point == Point(F(1), F(0))


def test_snapshot_undefined_tags_match_fully_visible():
    L = fx.l_polygon()
    p = Point(F(3), F(1))
    region = visibility_region(L, p)
    from polymeet.encoding import _region_entries

    entries = _region_entries(region)
    defined_idx = [i for i, e in enumerate(entries) if e.defined]
    enc, bits = encode_snapshot(region, defined_idx[0], defined_idx[1])
    vset = L.vertex_set()
    for raw, e in zip(entries, enc.entries):
        expected = raw.point in vset and fully_visible(L, p, raw.point)
        assert e.defined == expected
    # undefined entries carry the placeholder
    for e in enc.entries:
        if not e.defined:
            assert e.point == Point(F(0), F(0))
    assert any(not e.defined for e in enc.entries)


def test_snapshot_rejects_undefined_reference():
    L = fx.l_polygon()
    region = visibility_region(L, Point(F(3), F(1)))
    from polymeet.encoding import _region_entries

    entries = _region_entries(region)
    bad = next(i for i, e in enumerate(entries) if not e.defined)
    good = next(i for i, e in enumerate(entries) if e.defined)
    with pytest.raises(CodecError):
        encode_snapshot(region, bad, good)


# --- virtual vertex ------------------------------------------------------------------


def test_virtual_vertex_tie_on_edge_midpoint():
    P = fx.square_polygon()
    region = visibility_region(P, Point(F(0), F(0)))  # center of the square
    res = virtual_vertex(region)
    assert isinstance(res, VirtualVertexTie)
    assert len(res.vertices) == 4


def test_virtual_vertex_near_one_corner():
    P = fx.square_polygon()
    p = Point(F(3, 2), F(3, 2))
    region = visibility_region(P, p)
    res = virtual_vertex(region)
    assert isinstance(res, VirtualVertex)
    assert res.vertex == Point(F(2), F(2))
    assert res.sq_distance == F(1, 2)


def test_virtual_vertex_matches_bruteforce():
    P = fx.irregular12_polygon()
    from polymeet.geometry import dist_sq, visible

    for p in (Point(F(4), F(1)), Point(F(2), F(2)), Point(F(8), F(5))):
        region = visibility_region(P, p)
        res = virtual_vertex(region)
        best = None
        for v in P.vertices():
            if fully_visible(P, p, v):
                d = dist_sq(p, v)
                if best is None or d < best:
                    best = d
        want = best
        got = res.sq_distance if isinstance(res, VirtualVertex) else res.sq_distance
        assert got == want
