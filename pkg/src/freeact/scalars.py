"""Exact arithmetic in cyclotomic fields Q(zeta_L) and finite root-of-unity groups.

Scalars are represented canonically in the power basis of Q[x]/(Phi_L(x)),
with Fraction coefficients, so equality is coefficient equality and there is
no floating point anywhere.  Sign/positivity questions are settled separately
with interval arithmetic (mpmath.iv) at escalating precision.
"""

from fractions import Fraction
from functools import lru_cache
from math import gcd

from .errors import NotAMultiple

_ZERO = Fraction(0)
_ONE = Fraction(1)


def euler_phi(n):
    result = n
    p, m = 2, n
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def _poly_trim(c):
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_mul(a, b):
    out = [_ZERO] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            if y != 0:
                out[i + j] += x * y
    return _poly_trim(out)


def _poly_sub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [_ZERO] * (n - len(a))
    b = list(b) + [_ZERO] * (n - len(b))
    return _poly_trim([x - y for x, y in zip(a, b)])


def _poly_divmod(num, den):
    num = list(num)
    q = [_ZERO] * max(0, len(num) - len(den) + 1)
    inv_lead = _ONE / den[-1]
    for i in range(len(num) - len(den), -1, -1):
        coeff = num[i + len(den) - 1] * inv_lead
        if coeff != 0:
            q[i] = coeff
            for j, d in enumerate(den):
                num[i + j] -= coeff * d
    return _poly_trim(q), _poly_trim(num)


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n):
    """Coefficients of Phi_n(x), ascending, as Fractions."""
    # Phi_n = (x^n - 1) / prod_{d | n, d < n} Phi_d
    num = [_ZERO] * (n + 1)
    num[0], num[n] = Fraction(-1), _ONE
    num = _poly_trim(num)
    for d in range(1, n):
        if n % d == 0:
            q, r = _poly_divmod(num, list(cyclotomic_polynomial(d)))
            assert not r
            num = q
    return tuple(num)


@lru_cache(maxsize=None)
def _reduction_table(order):
    """x^k mod Phi_order for k up to max(2*deg-2, order), as coefficient tuples."""
    phi = list(cyclotomic_polynomial(order))
    deg = len(phi) - 1
    table = []
    cur = [_ONE]
    for _ in range(max(2 * deg - 1, order + 1)):
        table.append(tuple(cur + [_ZERO] * (deg - len(cur))))
        cur = [_ZERO] + cur
        if len(cur) - 1 >= deg:
            _, cur = _poly_divmod(cur, phi)
            cur = list(cur)
    return deg, tuple(table)


def _reduce(order, coeffs):
    deg, table = _reduction_table(order)
    out = [_ZERO] * deg
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        if k < deg:
            out[k] += c
        else:
            row = table[k]
            for i, t in enumerate(row):
                if t != 0:
                    out[i] += c * t
    return tuple(out)


class Cyclo:
    """An element of Q(zeta_L) in the canonical power basis mod Phi_L."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order, coeffs):
        self.order = order
        deg = euler_phi(order)
        coeffs = tuple(Fraction(c) for c in coeffs)
        if len(coeffs) != deg:
            coeffs = _reduce(order, coeffs)
        self.coeffs = coeffs

    @staticmethod
    def rational(value, order=1):
        deg = euler_phi(order)
        return Cyclo(order, (Fraction(value),) + (_ZERO,) * (deg - 1))

    @staticmethod
    def zeta(order, exponent=1):
        """The root of unity zeta_order**exponent."""
        e = exponent % order
        mono = [_ZERO] * (e + 1)
        mono[e] = _ONE
        return Cyclo(order, _reduce(order, mono))

    def embed(self, new_order):
        """Image under zeta_L -> zeta_{L'}^{L'/L}; a field homomorphism."""
        if new_order % self.order != 0:
            raise NotAMultiple(f"{self.order} does not divide {new_order}")
        if new_order == self.order:
            return self
        step = new_order // self.order
        out = [_ZERO] * (len(self.coeffs) * step)
        for k, c in enumerate(self.coeffs):
            if c != 0:
                out[k * step] += c
        return Cyclo(new_order, _reduce(new_order, out))

    def _pair(self, other):
        if not isinstance(other, Cyclo):
            other = Cyclo.rational(other)
        if self.order == other.order:
            return self, other
        common = self.order * other.order // gcd(self.order, other.order)
        return self.embed(common), other.embed(common)

    def __add__(self, other):
        a, b = self._pair(other)
        return Cyclo(a.order, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return Cyclo(self.order, tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        return self + (-other if isinstance(other, Cyclo) else Cyclo.rational(-Fraction(other)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._pair(other)
        # rational operands scale coefficientwise, no polynomial reduction
        if a.is_rational():
            c = a.coeffs[0]
            return Cyclo(b.order, tuple(c * x for x in b.coeffs))
        if b.is_rational():
            c = b.coeffs[0]
            return Cyclo(a.order, tuple(c * x for x in a.coeffs))
        return Cyclo(a.order, _reduce(a.order, _poly_mul(list(a.coeffs), list(b.coeffs))))

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero cyclotomic scalar")
        # extended Euclid in Q[x]: maintain s_i with s_i * self = r_i (mod Phi)
        phi = list(cyclotomic_polynomial(self.order))
        r0, r1 = phi, _poly_trim(list(self.coeffs))
        s0, s1 = [], [_ONE]
        while r1:
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
        # r0 is a nonzero constant gcd (Phi is irreducible)
        c = r0[0]
        return Cyclo(self.order, _reduce(self.order, [x / c for x in s0]))

    def __truediv__(self, other):
        a, b = self._pair(other)
        return a * b.inverse()

    def __rtruediv__(self, other):
        return Cyclo.rational(other).embed(self.order) * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result = Cyclo.rational(1, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self):
        """Complex conjugation: zeta_L -> zeta_L^(L-1)."""
        out = [_ZERO] * self.order
        for k, c in enumerate(self.coeffs):
            out[(-k) % self.order] += c
        return Cyclo(self.order, _reduce(self.order, out))

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def is_rational(self):
        return all(c == 0 for c in self.coeffs[1:])

    def as_rational(self):
        if not self.is_rational():
            raise ValueError(f"{self!r} is not rational")
        return self.coeffs[0]

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Cyclo.rational(other)
        if not isinstance(other, Cyclo):
            return NotImplemented
        a, b = self._pair(other)
        return a.coeffs == b.coeffs

    __hash__ = None

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        if self.is_rational():
            return f"Cyclo({self.coeffs[0]})"
        terms = [f"{c}*z{self.order}^{k}" for k, c in enumerate(self.coeffs) if c != 0]
        return "Cyclo(" + " + ".join(terms) + ")"

    def root_exponent(self, n):
        """k with self == zeta_n**k, or None if self is not in mu_n."""
        for k in range(n):
            if self == Cyclo.zeta(n, k):
                return k
        return None


class RootOfUnity:
    """zeta_order**exponent carried as exponent arithmetic mod order."""

    __slots__ = ("order", "exponent")

    def __init__(self, order, exponent):
        self.order = order
        self.exponent = exponent % order

    def __mul__(self, other):
        n = self.order * other.order // gcd(self.order, other.order)
        e = self.exponent * (n // self.order) + other.exponent * (n // other.order)
        return RootOfUnity(n, e)

    def inverse(self):
        return RootOfUnity(self.order, -self.exponent)

    def conjugate(self):
        return self.inverse()

    def to_scalar(self, order=None):
        target = order if order is not None else self.order
        if target % self.order != 0:
            raise NotAMultiple(f"{self.order} does not divide {target}")
        return Cyclo.zeta(target, self.exponent * (target // self.order))

    def __eq__(self, other):
        if not isinstance(other, RootOfUnity):
            return NotImplemented
        n = self.order * other.order // gcd(self.order, other.order)
        return (self.exponent * (n // self.order)) % n == \
               (other.exponent * (n // other.order)) % n

    def __hash__(self):
        g = gcd(self.exponent, self.order)
        return hash((self.order // g, (self.exponent // g) % (self.order // g)))

    def __repr__(self):
        return f"RootOfUnity(zeta_{self.order}^{self.exponent})"


def parse_scalar(text, order=None):
    """Parse "q(a/b, c/d, ...)" (power-basis coefficients) or "zeta(L)^k"."""
    text = text.strip()
    if text.startswith("zeta(") :
        inner, _, exp = text.partition(")")
        n = int(inner[len("zeta("):])
        k = int(exp.lstrip("^") or "1") if exp else 1
        z = Cyclo.zeta(n, k)
        return z.embed(order) if order else z
    if text.startswith("q(") and text.endswith(")"):
        parts = [Fraction(p.strip()) for p in text[2:-1].split(",")]
        if order is None:
            raise ValueError("q(...) literals need an explicit order")
        deg = euler_phi(order)
        parts = parts + [_ZERO] * (deg - len(parts))
        return Cyclo(order, tuple(parts[:deg]))
    return Cyclo.rational(Fraction(text)) if order is None else \
        Cyclo.rational(Fraction(text), order)


# -- interval certification -------------------------------------------------

def complex_interval(z, prec=64):
    """mpmath.iv complex enclosure of z under zeta_L -> exp(2*pi*i/L)."""
    from mpmath import iv
    old = iv.prec
    iv.prec = prec
    try:
        total_re = iv.mpf(0)
        total_im = iv.mpf(0)
        for k, c in enumerate(z.coeffs):
            if c == 0:
                continue
            cf = iv.mpf(c.numerator) / iv.mpf(c.denominator)
            angle = 2 * iv.pi * k / z.order
            total_re += cf * iv.cos(angle)
            total_im += cf * iv.sin(angle)
        return total_re, total_im
    finally:
        iv.prec = old


def real_sign(z, max_prec=2048):
    """Sign (+1, -1, 0) of a real element of Q(zeta_L).

    0 is only returned for the exact zero; otherwise the precision escalates
    until the interval excludes 0.  Raises if z is not real.
    """
    if z.conjugate() != z:
        raise ValueError("real_sign of a non-real scalar")
    if z.is_zero():
        return 0
    if z.is_rational():
        q = z.as_rational()
        return 1 if q > 0 else -1
    prec = 64
    while prec <= max_prec:
        re, im = complex_interval(z, prec)
        assert im.a <= 0 <= im.b
        if re.a > 0:
            return 1
        if re.b < 0:
            return -1
        prec *= 2
    raise ArithmeticError(f"interval sign of {z!r} undecided at {max_prec} bits")
