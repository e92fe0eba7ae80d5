"""Scalar fields: exact Gaussian rationals and double-precision complex.

Exact arrays are numpy ``object`` arrays whose entries are
:class:`GaussianRational`; float arrays are ``complex128``.  The two modes are
wrapped by :class:`Field`, which every algebra carries.
"""

from __future__ import annotations

import cmath
import math
import re
from fractions import Fraction
from numbers import Rational

import numpy as np

__all__ = [
    "GaussianRational",
    "Field",
    "EXACT",
    "FLOAT",
    "field_for",
    "parse_scalar",
    "scalar_to_json",
    "dagger",
]


class GaussianRational:
    """Element ``re + i*im`` of Q(i) with arbitrary-precision parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            if im:
                raise TypeError("imaginary part given twice")
            self.re, self.im = re.re, re.im
            return
        self.re = _to_fraction(re)
        self.im = _to_fraction(im)

    @classmethod
    def coerce(cls, value) -> GaussianRational:
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            return cls(value.real, value.imag)
        return cls(value)

    def __repr__(self):
        return f"GaussianRational({self})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __eq__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __neg__(self):
        return _new(-self.re, -self.im)

    def __pos__(self):
        return self

    def __add__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        if not other.im:
            return _new(self.re + other.re, self.im)
        if not self.im:
            return _new(self.re + other.re, other.im)
        return _new(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return _new(self.re - other.re, self.im - other.im if other.im else self.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        # most data is real; skip the cross terms when it is
        if not b:
            return _new(a * c, a * d if d else _ZERO)
        if not d:
            return _new(a * c, b * c)
        return _new(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) * self.inverse()

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = GaussianRational(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def inverse(self) -> GaussianRational:
        norm = self.re * self.re + self.im * self.im
        if not norm:
            raise ZeroDivisionError("GaussianRational division by zero")
        return GaussianRational(self.re / norm, -self.im / norm)

    def conjugate(self) -> GaussianRational:
        return GaussianRational(self.re, -self.im)

    def __abs__(self):
        return math.hypot(self.re, self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __float__(self):
        if self.im:
            raise TypeError("cannot convert non-real GaussianRational to float")
        return float(self.re)

    @property
    def real(self):
        return self.re

    @property
    def imag(self):
        return self.im


_ZERO = Fraction(0)


def _new(re: Fraction, im: Fraction) -> GaussianRational:
    g = object.__new__(GaussianRational)
    g.re = re
    g.im = im
    return g


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    if isinstance(value, np.integer):
        return Fraction(int(value))
    raise TypeError(f"cannot interpret {value!r} as a rational number")


_SCALAR_RE = re.compile(
    r"^\s*(?:(?P<re>[+-]?\d+(?:/\d+)?)(?![\d/]*i))?\s*"
    r"(?:(?P<im>[+-]?\s*(?:\d+(?:/\d+)?)?)\s*i)?\s*$"
)


def parse_scalar(value, exact: bool = True):
    """Parse a JSON scalar.

    Accepts integers, floats, rational strings (``"1/2"``), Gaussian strings
    (``"1/2-3i"``, ``"i"``) and ``[re, im]`` pairs.
    """
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex pair must have two entries, got {value!r}")
        re_part, im_part = (parse_scalar(v, exact) for v in value)
        if exact:
            if re_part.im or im_part.im:
                raise ValueError("pair entries must be real")
            return GaussianRational(re_part.re, im_part.re)
        return complex(re_part.real, im_part.real)
    if isinstance(value, bool):
        raise ValueError("booleans are not scalars")
    if isinstance(value, int):
        return GaussianRational(value) if exact else complex(value)
    if isinstance(value, float):
        if exact:
            raise ValueError(
                f"float literal {value!r} in exact mode; write it as a rational string"
            )
        return complex(value)
    if isinstance(value, str):
        text = value.replace(" ", "")
        match = _SCALAR_RE.match(text)
        if match and (match.group("re") or match.group("im") is not None) and text:
            re_text = match.group("re") or "0"
            im_text = match.group("im")
            if im_text is None:
                im = Fraction(0)
            elif im_text in ("", "+"):
                im = Fraction(1)
            elif im_text == "-":
                im = Fraction(-1)
            else:
                im = Fraction(im_text)
            g = GaussianRational(Fraction(re_text), im)
            return g if exact else complex(g)
        if not exact:
            try:
                return complex(text.replace("i", "j"))
            except ValueError:
                pass
        raise ValueError(f"cannot parse scalar {value!r}")
    raise ValueError(f"cannot parse scalar {value!r}")


def scalar_to_json(value):
    """Render a scalar deterministically: ints/rational strings when exact."""
    if isinstance(value, (GaussianRational, Fraction, int)):
        g = GaussianRational.coerce(value)
        if not g.im:
            return int(g.re) if g.re.denominator == 1 else str(g.re)
        return str(g)
    z = complex(value)
    if z.imag == 0:
        return float(z.real)
    return [float(z.real), float(z.imag)]


class Field:
    """One of the two scalar modes, with array constructors and zero tests."""

    def __init__(self, name: str, exact: bool, rtol: float = 1e-9):
        self.name = name
        self.exact = exact
        self.rtol = rtol

    def __repr__(self):
        return f"Field({self.name!r})"

    def __eq__(self, other):
        return isinstance(other, Field) and other.exact == self.exact

    def __hash__(self):
        return hash(self.exact)

    def scalar(self, value):
        if self.exact:
            return GaussianRational.coerce(value)
        return complex(value)

    @property
    def zero(self):
        return self.scalar(0)

    @property
    def one(self):
        return self.scalar(1)

    def array(self, data) -> np.ndarray:
        if self.exact:
            arr = np.asarray(data, dtype=object)
            out = np.empty(arr.shape, dtype=object)
            for idx, value in np.ndenumerate(arr):
                if isinstance(value, (float, complex, np.floating, np.complexfloating)):
                    raise TypeError(f"inexact entry {value!r} in exact array")
                out[idx] = GaussianRational.coerce(value)
            return out
        arr = np.asarray(data)
        if arr.dtype == object:
            arr = np.vectorize(complex, otypes=[complex])(arr)
        return arr.astype(complex)

    def zeros(self, shape) -> np.ndarray:
        if self.exact:
            out = np.empty(shape, dtype=object)
            out.fill(GaussianRational(0))
            return out
        return np.zeros(shape, dtype=complex)

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = self.one
        return out

    def is_zero_matrix(self, m: np.ndarray, scale: float | None = None) -> bool:
        """Exact: every entry is zero.  Float: max entry below ``rtol * scale``."""
        if m.size == 0:
            return True
        if self.exact:
            return not any(m.flat)
        bound = self.rtol * (1.0 if scale is None else max(scale, 1.0))
        return float(np.max(np.abs(m))) <= bound

    def matrices_equal(self, a: np.ndarray, b: np.ndarray, rtol: float | None = None) -> bool:
        if a.shape != b.shape:
            return False
        if self.exact:
            return all(x == y for x, y in zip(a.flat, b.flat))
        tol = self.rtol if rtol is None else rtol
        scale = max(1.0, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
        return float(np.max(np.abs(a - b), initial=0.0)) <= tol * scale

    def to_float(self, m: np.ndarray) -> np.ndarray:
        if self.exact:
            return np.vectorize(complex, otypes=[complex])(m) if m.size else np.zeros(m.shape, complex)
        return m

    def root_of_unity(self, turns):
        """``exp(2*pi*i*turns)``; exact mode only for orders dividing 4."""
        if self.exact:
            t = Fraction(turns) % 1
            table = {
                Fraction(0): GaussianRational(1),
                Fraction(1, 4): GaussianRational(0, 1),
                Fraction(1, 2): GaussianRational(-1),
                Fraction(3, 4): GaussianRational(0, -1),
            }
            if t not in table:
                raise ValueError(
                    f"root of unity with turns={turns} is not a Gaussian rational; "
                    "use float mode"
                )
            return table[t]
        return cmath.exp(2j * math.pi * float(turns))


EXACT = Field("exact", True)
FLOAT = Field("float", False)


def field_for(m: np.ndarray) -> Field:
    return EXACT if m.dtype == object else FLOAT


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``numpy.kron`` with a shortcut for 1x1 factors (common for group duals)."""
    if a.shape == (1, 1):
        return b * a[0, 0]
    if b.shape == (1, 1):
        return a * b[0, 0]
    return np.kron(a, b)


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose, exact or float."""
    if m.dtype == object:
        out = np.empty((m.shape[1], m.shape[0]), dtype=object)
        for (i, j), value in np.ndenumerate(m):
            out[j, i] = value.conjugate()
        return out
    return m.conj().T
