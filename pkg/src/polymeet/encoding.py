"""Positional-encoding codec over arbitrary-precision bit strings.

A searcher that can only memorize one nonnegative real (its distance to
the nearest fully visible vertex) packs everything into the fractional
binary digits of that number.  The pieces:

* the self-delimiting unary-style integer code 0^n 1;
* rationals as sign / |p| / q, each integer coded as above;
* the scaled packing of a finite list of reals: 0^lambda 1^n 0, the sign
  bits, then mantissa and exponent digits interleaved column by column
  (the scale lambda makes the packed value arbitrarily small without
  changing its decoded meaning);
* snapshot encoding in the frame spanned by two chosen fully visible
  vertices, with non-fully-visible endpoints tagged undefined and replaced
  by a placeholder.

Only finite binary expansions (dyadic rationals) are accepted by the real
packer; general rationals go through the rational code.  All decoding is
exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from polymeet.geometry import Point, Similarity, VisibilityRegion, dist_sq
from polymeet.scalars import sgn


class CodecError(ValueError):
    pass


class UnsupportedValueError(CodecError):
    pass


class BitString:
    """Finite bit sequence read as the fractional part of a binary number.

    Trailing zeros are semantically irrelevant (the expansion is implicitly
    zero-extended), but stored length is preserved for exact round trips.
    """

    __slots__ = ("bits",)

    def __init__(self, bits: Iterable[int] | str = ()):
        if isinstance(bits, str):
            vals = [int(ch) for ch in bits]
        else:
            vals = [int(b) for b in bits]
        if any(b not in (0, 1) for b in vals):
            raise CodecError("bits must be 0 or 1")
        self.bits = tuple(vals)

    def __iter__(self):
        return iter(self.bits)

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, i):
        return self.bits[i]

    def __eq__(self, other):
        return isinstance(other, BitString) and self.bits == other.bits

    def __hash__(self):
        return hash(self.bits)

    def __add__(self, other: "BitString") -> "BitString":
        return BitString(self.bits + tuple(other))

    def __str__(self):
        return "".join(str(b) for b in self.bits)

    def __repr__(self):
        return f"BitString({str(self)!r})"

    def value(self) -> Fraction:
        """The real number 0.b1 b2 b3 ... as an exact rational."""
        num = 0
        for b in self.bits:
            num = (num << 1) | b
        return Fraction(num, 1 << len(self.bits)) if self.bits else Fraction(0)

    def to_hex(self) -> str:
        """Length-prefixed hex form for transport: '<nbits>:<hex>'."""
        n = len(self.bits)
        num = 0
        for b in self.bits:
            num = (num << 1) | b
        pad = (-n) % 4
        num <<= pad
        digits = (n + pad) // 4
        return f"{n}:{num:0{digits}x}" if n else "0:"

    @classmethod
    def from_hex(cls, text: str) -> "BitString":
        try:
            head, hexpart = text.split(":", 1)
            n = int(head)
        except ValueError:
            raise CodecError(f"bad hex bit string {text!r}")
        if n == 0:
            return cls()
        num = int(hexpart, 16)
        total = len(hexpart) * 4
        bits = [(num >> (total - 1 - i)) & 1 for i in range(n)]
        return cls(bits)


# -- integer and rational codes ------------------------------------------------


def encode_uint(n: int) -> BitString:
    if n < 0:
        raise CodecError("only nonnegative integers are encodable")
    return BitString([0] * n + [1])


def decode_uint(bits: Sequence[int], pos: int = 0) -> tuple[int, int]:
    """(value, next position); raises on an all-zero tail."""
    n = 0
    i = pos
    while i < len(bits) and bits[i] == 0:
        n += 1
        i += 1
    if i >= len(bits):
        raise CodecError("malformed integer code: no terminator")
    return n, i + 1


def encode_rational(x: Fraction) -> BitString:
    x = Fraction(x)
    if x.denominator <= 0:
        raise CodecError("denominator must be positive")
    sign = 0 if x >= 0 else 1
    return encode_uint(sign) + encode_uint(abs(x.numerator)) + encode_uint(x.denominator)


def decode_rational(bits: Sequence[int], pos: int = 0) -> tuple[Fraction, int]:
    sign, pos = decode_uint(bits, pos)
    if sign not in (0, 1):
        raise CodecError("malformed sign code")
    p, pos = decode_uint(bits, pos)
    q, pos = decode_uint(bits, pos)
    if q == 0:
        raise CodecError("zero denominator")
    val = Fraction(p, q)
    return (-val if sign else val), pos


# -- scaled real packing ---------------------------------------------------------


def _dyadic_digits(x: Fraction) -> tuple[int, list[int]]:
    """(exponent e, mantissa bits) with |x| = 0.b1 b2 ... * 2^e, e minimal >= 0."""
    x = abs(x)
    if x == 0:
        return 0, []
    den = x.denominator
    if den & (den - 1):
        raise UnsupportedValueError(f"{x} has no finite binary expansion")
    e = 0
    while x >= (1 << e):
        e += 1
    m = x / (1 << e)
    bits = []
    while m:
        m *= 2
        if m >= 1:
            bits.append(1)
            m -= 1
        else:
            bits.append(0)
    return e, bits


def _uint_bits_lsb(n: int) -> list[int]:
    out = []
    while n:
        out.append(n & 1)
        n >>= 1
    return out


@dataclass(frozen=True)
class PackedNumber:
    lam: int
    signs: tuple[int, ...]
    mantissas: tuple[tuple[int, ...], ...]
    exponents: tuple[tuple[int, ...], ...]   # LSB first

    @property
    def n(self) -> int:
        return len(self.signs)

    def bits(self) -> BitString:
        out = [0] * self.lam + [1] * self.n + [0] + list(self.signs)
        depth = 0
        for m, e in zip(self.mantissas, self.exponents):
            depth = max(depth, len(m), len(e))
        for j in range(depth):
            for i in range(self.n):
                m = self.mantissas[i]
                e = self.exponents[i]
                out.append(m[j] if j < len(m) else 0)
                out.append(e[j] if j < len(e) else 0)
        while out and out[-1] == 0 and len(out) > self.lam + self.n + 1:
            out.pop()
        return BitString(out)

    def values(self) -> list[Fraction]:
        vals = []
        for s, m, e in zip(self.signs, self.mantissas, self.exponents):
            exp = 0
            for j, b in enumerate(e):
                exp += b << j
            v = Fraction(0)
            for j, b in enumerate(m):
                if b:
                    v += Fraction(1, 1 << (j + 1))
            v *= 1 << exp
            vals.append(-v if s else v)
        return vals


def pack_reals(values: Sequence[Fraction], lam: int = 0) -> BitString:
    if lam < 0:
        raise CodecError("scale must be nonnegative")
    signs = []
    mants = []
    exps = []
    for v in values:
        v = Fraction(v)
        signs.append(0 if v >= 0 else 1)
        e, mbits = _dyadic_digits(v)
        mants.append(tuple(mbits))
        exps.append(tuple(_uint_bits_lsb(e)))
    return PackedNumber(lam, tuple(signs), tuple(mants), tuple(exps)).bits()


def unpack_reals(bits: BitString | Sequence[int]) -> tuple[list[Fraction], int]:
    """(values, lambda); reads to the end of the finite string, implicitly
    zero-extending the interleaved columns."""
    seq = list(bits)
    lam = 0
    i = 0
    while i < len(seq) and seq[i] == 0:
        lam += 1
        i += 1
    if i >= len(seq):
        if lam == 0:
            raise CodecError("empty packed string")
        return [], lam - 1
    n = 0
    while i < len(seq) and seq[i] == 1:
        n += 1
        i += 1
    if i >= len(seq) or seq[i] != 0:
        raise CodecError("malformed packed header")
    i += 1
    if n == 0:
        return [], lam
    # zero-extension: a finite string may end anywhere past the header
    signs = seq[i:i + n] + [0] * max(0, n - (len(seq) - i))
    i += n
    cols = seq[i:]
    mants: list[list[int]] = [[] for _ in range(n)]
    exps: list[list[int]] = [[] for _ in range(n)]
    for k, b in enumerate(cols):
        slot = k % (2 * n)
        if slot % 2 == 0:
            mants[slot // 2].append(b)
        else:
            exps[slot // 2].append(b)
    packed = PackedNumber(
        lam, tuple(signs), tuple(tuple(m) for m in mants), tuple(tuple(e) for e in exps)
    )
    return packed.values(), lam


# -- snapshots -------------------------------------------------------------------


class SnapshotEntry(NamedTuple):
    point: Point
    defined: bool


@dataclass(frozen=True)
class EncodedSnapshot:
    entries: tuple[SnapshotEntry, ...]
    ref_a: int
    ref_b: int

    def defined_points(self) -> list[Point]:
        return [e.point for e in self.entries if e.defined]


PLACEHOLDER = Point(Fraction(0), Fraction(0))


def _region_entries(region: VisibilityRegion) -> list[SnapshotEntry]:
    out = []
    for pc in region.pieces:
        out.append(SnapshotEntry(pc.a, pc.a_full_vertex))
        out.append(SnapshotEntry(pc.b, pc.b_full_vertex))
    return out


def encode_snapshot(region: VisibilityRegion, v: int, v2: int) -> tuple[EncodedSnapshot, BitString]:
    """Snapshot re-expressed in the frame sending entry v to the origin and
    entry v2 to (1, 0); undefined endpoints are placeholder-tagged."""
    entries = _region_entries(region)
    if not (0 <= v < len(entries) and 0 <= v2 < len(entries)) or v == v2:
        raise CodecError("reference indices out of range")
    ea, eb = entries[v], entries[v2]
    if not (ea.defined and eb.defined):
        raise CodecError("reference endpoints must be fully visible vertices")
    if ea.point == eb.point:
        raise CodecError("reference vertices must be distinct points")
    frame = Similarity.to_unit_frame(ea.point, eb.point)
    normalized: list[SnapshotEntry] = []
    for e in entries:
        if e.defined:
            q = frame.apply(e.point)
            if not isinstance(q.x, Fraction) or not isinstance(q.y, Fraction):
                raise UnsupportedValueError("snapshot coordinates are not rational in frame")
            normalized.append(SnapshotEntry(q, True))
        else:
            normalized.append(SnapshotEntry(PLACEHOLDER, False))
    bits = encode_uint(len(normalized)) + encode_uint(v) + encode_uint(v2)
    for e in normalized:
        bits = bits + encode_uint(1 if e.defined else 0)
        bits = bits + encode_rational(e.point.x) + encode_rational(e.point.y)
    return EncodedSnapshot(tuple(normalized), v, v2), bits


def decode_snapshot(bits: BitString | Sequence[int], pos: int = 0) -> tuple[EncodedSnapshot, int]:
    seq = list(bits)
    count, pos = decode_uint(seq, pos)
    va, pos = decode_uint(seq, pos)
    vb, pos = decode_uint(seq, pos)
    entries = []
    for _ in range(count):
        defined, pos = decode_uint(seq, pos)
        x, pos = decode_rational(seq, pos)
        y, pos = decode_rational(seq, pos)
        entries.append(SnapshotEntry(Point(x, y), bool(defined)))
    return EncodedSnapshot(tuple(entries), va, vb), pos


# -- virtual vertex ----------------------------------------------------------------


class VirtualVertex(NamedTuple):
    vertex: Point
    sq_distance: Fraction


class VirtualVertexTie(NamedTuple):
    vertices: tuple[Point, ...]
    sq_distance: Fraction


def virtual_vertex(region: VisibilityRegion):
    """Unique closest fully visible vertex, or an explicit tie."""
    p = region.viewpoint
    best = None
    ties: list[Point] = []
    for v in region.full_vertices():
        d = dist_sq(p, v)
        if best is None or sgn(d - best) < 0:
            best = d
            ties = [v]
        elif sgn(d - best) == 0 and v not in ties:
            ties.append(v)
    if best is None:
        raise CodecError("no fully visible vertex in the region")
    if len(ties) > 1:
        return VirtualVertexTie(tuple(ties), best)
    return VirtualVertex(ties[0], best)
