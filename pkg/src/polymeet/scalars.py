"""Exact scalar arithmetic for the geometry kernel.

Two scalar kinds flow through every predicate:

* ``fractions.Fraction`` — the default coordinate type.
* ``RealCyclotomic`` — an element of the real subfield of Q(zeta_N),
  needed because no polygon with rational vertices has rotational
  symmetry of order other than 1, 2 or 4.  Elements are stored as an
  exact integer coefficient vector over the power basis of zeta_N (a
  primitive N-th root of unity) with a common positive denominator,
  reduced modulo the N-th cyclotomic polynomial.  The zero test is a
  canonical-form check; the sign of a nonzero element is resolved by
  outward-rounded interval evaluation at increasing precision, which
  terminates because the element is exactly known to be nonzero.

Values that happen to be rational are always demoted to ``Fraction``,
so equal values never live in two representations.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

import mpmath

Scalar = Union[int, Fraction, "RealCyclotomic"]

_FAST_PREC = 80
_MAX_PREC = 4096


def _poly_mul_int(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _poly_divmod_int(num: Sequence[int], den: Sequence[int]) -> tuple[list[int], list[int]]:
    # den must be monic; exact integer division.
    num = list(num)
    dl = len(den) - 1
    q = [0] * max(1, len(num) - dl)
    while len(num) - 1 >= dl and any(num):
        shift = len(num) - 1 - dl
        c = num[-1]
        q[shift] = c
        for i, d in enumerate(den):
            num[shift + i] -= c * d
        while num and num[-1] == 0:
            num.pop()
        if not num:
            break
    while len(num) < dl:
        num.append(0)
    return q, num[:dl]


def cyclotomic_poly(n: int) -> list[int]:
    """Integer coefficients of the n-th cyclotomic polynomial, low degree first."""
    num = [0] * n + [0]
    num[0], num[n] = -1, 1  # x^n - 1
    poly = num
    for d in range(1, n):
        if n % d == 0:
            phi_d = cyclotomic_poly(d) if d > 1 else [-1, 1]
            poly, rem = _poly_divmod_int(poly, phi_d)
            assert not any(rem)
    return poly


class CyclotomicField:
    """Arithmetic context for the real subfield of Q(zeta_N)."""

    _instances: dict[int, "CyclotomicField"] = {}

    def __new__(cls, level: int) -> "CyclotomicField":
        inst = cls._instances.get(level)
        if inst is None:
            inst = super().__new__(cls)
            inst._init(level)
            cls._instances[level] = inst
        return inst

    def _init(self, level: int) -> None:
        if level < 3:
            raise ValueError("cyclotomic level must be >= 3")
        self.level = level
        self.phi = cyclotomic_poly(level)
        self.degree = len(self.phi) - 1
        # zeta^(degree+k) over the power basis, enough rows for zeta^level and
        # for products of reduced elements (degree 2*degree-2).
        n_rows = max(level, 2 * self.degree - 2) - self.degree + 1
        rows: list[list[Fraction]] = []
        base = [Fraction(-c) for c in self.phi[:-1]]
        rows.append(base)
        for _ in range(n_rows - 1):
            prev = rows[-1]
            nxt = [Fraction(0)] + prev[:-1]
            if prev[-1]:
                for i, b in enumerate(base):
                    nxt[i] += prev[-1] * b
            rows.append(nxt)
        self._red_rows = rows
        self._cos_cache: dict[int, tuple[tuple[float, float], ...]] = {}
        self._inv_cache: dict[tuple[int, ...], "RealCyclotomic"] = {}

    # -- element construction ------------------------------------------------

    def element(self, coeffs: Iterable[Fraction]) -> Scalar:
        cs = [Fraction(c) for c in coeffs]
        if len(cs) > self.degree:
            cs = self._reduce(cs)
        cs += [Fraction(0)] * (self.degree - len(cs))
        den = 1
        for c in cs:
            den = den * c.denominator // math.gcd(den, c.denominator)
        nums = tuple(int(c * den) for c in cs)
        return _make(self, nums, den)

    def zeta_pow(self, k: int) -> Scalar:
        """zeta^k as a field element (not generally real)."""
        k %= self.level
        cs = [Fraction(0)] * (self.level + 1)
        cs[k] = Fraction(1)
        return self.element(cs)

    def cos2pi(self, num: int, den: int) -> Scalar:
        """cos(2*pi*num/den); requires den | level."""
        if self.level % den:
            raise ValueError("angle not representable at this level")
        m = (num * (self.level // den)) % self.level
        return (self.zeta_pow(m) + self.zeta_pow(self.level - m)) / 2

    def sin2pi(self, num: int, den: int) -> Scalar:
        if self.level % 4:
            raise ValueError("level must be divisible by 4 for sines")
        if self.level % den:
            raise ValueError("angle not representable at this level")
        m = (num * (self.level // den)) % self.level
        diff = self.zeta_pow(m) - self.zeta_pow(self.level - m)
        # 1/(2i) = zeta^(3N/4) / 2
        return diff * self.zeta_pow(3 * self.level // 4) / 2

    # -- internals -----------------------------------------------------------

    def _reduce(self, cs: list[Fraction]) -> list[Fraction]:
        d = self.degree
        out = cs[:d] + [Fraction(0)] * (d - min(d, len(cs)))
        for k in range(d, len(cs)):
            c = cs[k]
            if c:
                row = self._red_rows[k - d]
                for i in range(d):
                    out[i] += c * row[i]
        return out

    def _mul_nums(self, a: Sequence[int], b: Sequence[int]) -> list[int]:
        raw = _poly_mul_int(a, b)
        d = self.degree
        if len(raw) <= d:
            return list(raw) + [0] * (d - len(raw))
        out = list(raw[:d])
        rows = self._red_rows
        extra_den = 1
        # reduction rows are Fraction-valued; collect over a common denominator
        fout = [Fraction(v) for v in out]
        for k in range(d, len(raw)):
            c = raw[k]
            if c:
                row = rows[k - d]
                for i in range(d):
                    fout[i] += c * row[i]
        den = 1
        for f in fout:
            den = den * f.denominator // math.gcd(den, f.denominator)
        return [int(f * den) for f in fout] + [den]  # last slot carries denominator

    def cos_intervals(self, prec: int) -> tuple[tuple[float, float], ...]:
        """Outward float enclosures of cos(2*pi*k/level) computed at `prec` bits."""
        cached = self._cos_cache.get(prec)
        if cached is None:
            iv = mpmath.iv
            old = iv.prec
            try:
                iv.prec = prec
                vals = []
                for k in range(self.degree):
                    x = iv.cos(2 * iv.pi * k / self.level)
                    lo = float(mpmath.mpf(x.a)) - 1e-17
                    hi = float(mpmath.mpf(x.b)) + 1e-17
                    vals.append((lo, hi))
            finally:
                iv.prec = old
            cached = tuple(vals)
            self._cos_cache[prec] = cached
        return cached

    def __repr__(self) -> str:
        return f"CyclotomicField({self.level})"


def _make(field: CyclotomicField, nums: tuple[int, ...], den: int) -> Scalar:
    if den < 0:
        nums = tuple(-n for n in nums)
        den = -den
    g = den
    for n in nums:
        g = math.gcd(g, n)
        if g == 1:
            break
    if g > 1:
        nums = tuple(n // g for n in nums)
        den //= g
    if all(n == 0 for n in nums[1:]):
        return Fraction(nums[0], den)
    el = object.__new__(RealCyclotomic)
    el.field = field
    el.nums = nums
    el.den = den
    el._iv = None
    return el


def _coerce(field: CyclotomicField, value) -> tuple[tuple[int, ...], int] | None:
    if isinstance(value, RealCyclotomic):
        if value.field is not field:
            return None
        return value.nums, value.den
    if isinstance(value, int):
        return (value,) + (0,) * (field.degree - 1), 1
    if isinstance(value, Fraction):
        return (value.numerator,) + (0,) * (field.degree - 1), value.denominator
    return None


class RealCyclotomic:
    """Exact real element of Q(zeta_N); construct via CyclotomicField."""

    __slots__ = ("field", "nums", "den", "_iv")

    field: CyclotomicField
    nums: tuple[int, ...]
    den: int

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        co = _coerce(self.field, other)
        if co is None:
            return NotImplemented
        onums, oden = co
        den = self.den * oden // math.gcd(self.den, oden)
        fa, fb = den // self.den, den // oden
        return _make(self.field, tuple(a * fa + b * fb for a, b in zip(self.nums, onums)), den)

    __radd__ = __add__

    def __neg__(self):
        return _make(self.field, tuple(-n for n in self.nums), self.den)

    def __sub__(self, other):
        co = _coerce(self.field, other)
        if co is None:
            return NotImplemented
        onums, oden = co
        den = self.den * oden // math.gcd(self.den, oden)
        fa, fb = den // self.den, den // oden
        return _make(self.field, tuple(a * fa - b * fb for a, b in zip(self.nums, onums)), den)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        co = _coerce(self.field, other)
        if co is None:
            return NotImplemented
        onums, oden = co
        packed = self.field._mul_nums(self.nums, onums)
        d = self.field.degree
        if len(packed) == d:
            return _make(self.field, tuple(packed), self.den * oden)
        extra = packed[d]
        return _make(self.field, tuple(packed[:d]), self.den * oden * extra)

    __rmul__ = __mul__

    def __truediv__(self, other):
        co = _coerce(self.field, other)
        if co is None:
            return NotImplemented
        onums, oden = co
        inv = _field_inverse(self.field, onums)
        return (self * inv) * Fraction(oden)

    def __rtruediv__(self, other):
        inv = _field_inverse(self.field, self.nums)
        return inv * Fraction(self.den) * other

    def __pow__(self, k: int):
        if k < 0:
            return 1 / (self ** (-k))
        out: Scalar = Fraction(1)
        base: Scalar = self
        while k:
            if k & 1:
                out = base * out
            base = base * base
            k >>= 1
        return out

    def __abs__(self):
        return self if self.sign() >= 0 else -self

    # -- comparisons ---------------------------------------------------------

    def sign(self) -> int:
        lo, hi = self._interval(_FAST_PREC)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        prec = _FAST_PREC * 2
        while prec <= _MAX_PREC:
            lo, hi = self._interval_mp(prec)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            prec *= 2
        raise ArithmeticError("sign undecided at maximum precision for nonzero element")

    def __eq__(self, other):
        co = _coerce(self.field, other)
        if co is None:
            return False
        return co == (self.nums, self.den)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __lt__(self, other):
        d = self - other
        if isinstance(d, Fraction):
            return d < 0
        return d.sign() < 0

    def __le__(self, other):
        d = self - other
        if isinstance(d, Fraction):
            return d <= 0
        return d.sign() < 0

    def __gt__(self, other):
        d = self - other
        if isinstance(d, Fraction):
            return d > 0
        return d.sign() > 0

    def __ge__(self, other):
        d = self - other
        if isinstance(d, Fraction):
            return d >= 0
        return d.sign() > 0

    def __hash__(self):
        return hash((self.field.level, self.nums, self.den))

    def __bool__(self):
        return True  # zero is always a Fraction

    # -- numerics ------------------------------------------------------------

    def _interval(self, prec: int) -> tuple[float, float]:
        if self._iv is None:
            try:
                cos = self.field.cos_intervals(prec)
                lo = hi = 0.0
                for n, (clo, chi) in zip(self.nums, cos):
                    if n == 0:
                        continue
                    a, b = n * clo, n * chi
                    if a > b:
                        a, b = b, a
                    lo += a
                    hi += b
                span = max(abs(lo), abs(hi), 1.0)
                slop = span * 1e-12
                self._iv = ((lo - slop) / self.den, (hi + slop) / self.den)
            except OverflowError:
                self._iv = (float("-inf"), float("inf"))
        return self._iv

    def _interval_mp(self, prec: int) -> tuple[mpmath.mpf, mpmath.mpf]:
        iv = mpmath.iv
        old = iv.prec
        try:
            iv.prec = prec
            total = iv.mpf(0)
            for k, n in enumerate(self.nums):
                if n:
                    total += n * iv.cos(2 * iv.pi * k / self.field.level)
            total /= self.den
            return mpmath.mpf(total.a), mpmath.mpf(total.b)
        finally:
            iv.prec = old

    def __float__(self):
        lo, hi = self._interval_mp(128)
        return float((lo + hi) / 2)

    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(n, self.den) for n in self.nums)

    def conj(self) -> Scalar:
        cs = [Fraction(0)] * self.field.level
        for k, n in enumerate(self.nums):
            cs[(self.field.level - k) % self.field.level] += Fraction(n, self.den)
        return self.field.element(cs)

    def is_real(self) -> bool:
        return self.conj() == self

    def __repr__(self):
        return f"Cyc{self.field.level}({float(self):.6g})"


def _field_inverse(field: CyclotomicField, nums: Sequence[int]) -> Scalar:
    if all(n == 0 for n in nums):
        raise ZeroDivisionError("division by zero field element")
    key = tuple(nums)
    cached = field._inv_cache.get(key)
    if cached is not None:
        return cached
    # extended Euclid in Q[x] modulo the cyclotomic polynomial
    phi = [Fraction(c) for c in field.phi]
    a = [Fraction(n) for n in nums]
    r0, r1 = phi, a
    t0, t1 = [Fraction(0)], [Fraction(1)]

    def pdeg(p):
        d = len(p) - 1
        while d >= 0 and p[d] == 0:
            d -= 1
        return d

    while pdeg(r1) > 0:
        q, r = _poly_divmod_frac(r0, r1)
        t0, t1 = t1, _poly_sub(t0, _poly_mul_frac(q, t1))
        r0, r1 = r1, r
    d1 = pdeg(r1)
    if d1 < 0:
        raise ZeroDivisionError("element not invertible")
    c = r1[d1]
    inv_coeffs = [t / c for t in t1]
    result = field.element(inv_coeffs)
    field._inv_cache[key] = result
    return result


def _poly_divmod_frac(num, den):
    num = list(num)
    dd = len(den) - 1
    while dd >= 0 and den[dd] == 0:
        dd -= 1
    q = [Fraction(0)] * max(1, len(num))
    while True:
        nd = len(num) - 1
        while nd >= 0 and num[nd] == 0:
            nd -= 1
        if nd < dd:
            break
        c = num[nd] / den[dd]
        q[nd - dd] = c
        for i in range(dd + 1):
            num[nd - dd + i] -= c * den[i]
    return q, num


def _poly_mul_frac(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _poly_sub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return [x - y for x, y in zip(a, b)]


# -- generic helpers ----------------------------------------------------------


def sgn(x: Scalar) -> int:
    """Exact sign of a scalar: -1, 0 or +1."""
    if isinstance(x, RealCyclotomic):
        return x.sign()
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def scalar_float(x: Scalar) -> float:
    return float(x)


def scalar_key(x: Scalar):
    """Hashable canonical identity of a scalar value."""
    if isinstance(x, RealCyclotomic):
        return ("cyc", x.field.level, x.nums, x.den)
    f = Fraction(x)
    return (f.numerator, f.denominator)


def scalar_to_json(x: Scalar):
    if isinstance(x, RealCyclotomic):
        return {"cyc": x.field.level, "coeffs": [f"{c.numerator}/{c.denominator}" for c in x.coeffs()]}
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def scalar_from_json(obj) -> Scalar:
    if isinstance(obj, str):
        return Fraction(obj)
    if isinstance(obj, int):
        return Fraction(obj)
    if isinstance(obj, dict) and "cyc" in obj:
        field = CyclotomicField(int(obj["cyc"]))
        return field.element([Fraction(c) for c in obj["coeffs"]])
    raise ValueError(f"bad scalar encoding: {obj!r}")


def _frac_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None if irrational."""
    if q < 0:
        return None
    a = math.isqrt(q.numerator)
    b = math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


class PathLength:
    """Exact sum ``sum coeff_i * sqrt(core_i)`` of square roots of scalars.

    Edge-weight accumulator for geodesic comparisons.  Radicands whose
    ratio is the square of a rational are merged into a single core, so
    e.g. 2*sqrt(2) and sqrt(8) compare equal exactly.  Remaining
    comparisons are settled by adaptive interval evaluation, which
    terminates whenever the difference is nonzero; a residual exactly-equal
    pair with unmergeable cores raises rather than guessing.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        # key -> (core scalar, coeff Fraction), coeff > 0
        self.terms = terms or {}

    @classmethod
    def of_sq(cls, sq: Scalar) -> "PathLength":
        out = cls()
        out._insert(sq, Fraction(1))
        return out

    def _insert(self, sq: Scalar, coeff: Fraction) -> None:
        if sgn(sq) == 0 or coeff == 0:
            return
        if isinstance(sq, int):
            sq = Fraction(sq)
        if isinstance(sq, Fraction):
            r = _frac_sqrt(sq)
            if r is not None:
                sq, coeff = Fraction(1), coeff * r
        for k, (core, c) in self.terms.items():
            ratio = sq / core
            if isinstance(ratio, Fraction):
                root = _frac_sqrt(ratio)
                if root is not None:
                    nc = c + coeff * root
                    if nc == 0:
                        del self.terms[k]
                    else:
                        self.terms[k] = (core, nc)
                    return
        self.terms[scalar_key(sq)] = (sq, coeff)

    def __add__(self, other: "PathLength") -> "PathLength":
        out = PathLength(dict(self.terms))
        for core, c in other.terms.values():
            out._insert(core, c)
        return out

    def _cmp(self, other: "PathLength") -> int:
        diff = PathLength(dict(self.terms))
        for core, c in other.terms.values():
            diff._insert(core, -c)
        pos = [(r, m) for r, m in diff.terms.values() if m > 0]
        neg = [(r, -m) for r, m in diff.terms.values() if m < 0]
        if not pos and not neg:
            return 0
        if not neg:
            return 1
        if not pos:
            return -1
        prec = 64
        iv = mpmath.iv
        while prec <= _MAX_PREC:
            old = iv.prec
            try:
                iv.prec = prec
                total = iv.mpf(0)
                for r, m in pos:
                    total += _iv_frac(m, prec) * _iv_sqrt(r, prec)
                for r, m in neg:
                    total -= _iv_frac(m, prec) * _iv_sqrt(r, prec)
                lo, hi = mpmath.mpf(total.a), mpmath.mpf(total.b)
            finally:
                iv.prec = old
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            prec *= 2
        raise ArithmeticError("path length comparison undecided at max precision")

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __eq__(self, other):
        return isinstance(other, PathLength) and self._cmp(other) == 0

    def __hash__(self):
        raise TypeError("PathLength is not hashable")

    def to_float(self) -> float:
        return float(
            sum(m * math.sqrt(max(0.0, scalar_float(r))) for r, m in self.terms.values())
        )

    def __repr__(self):
        return f"PathLength({self.to_float():.6g})"


def _iv_frac(f: Fraction, prec: int):
    iv = mpmath.iv
    return iv.mpf(f.numerator) / f.denominator


def _iv_sqrt(r: Scalar, prec: int):
    iv = mpmath.iv
    if isinstance(r, RealCyclotomic):
        lo, hi = r._interval_mp(prec)
        return iv.sqrt(iv.mpf([lo, hi]))
    f = Fraction(r)
    return iv.sqrt(iv.mpf(f.numerator) / f.denominator)
