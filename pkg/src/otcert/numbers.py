"""Number modes and guarded extended-real arithmetic.

Every instance works in one of two modes:

* ``"rational"`` -- exact :class:`fractions.Fraction` arithmetic.  This is the
  default for certificates, which are exact combinatorial statements.
* ``"float"`` -- 64-bit floats compared with tolerance :data:`TOL`.

Finite values are Fractions/ints (rational mode) or floats (float mode);
``+inf`` and ``-inf`` are the float infinities in both modes.  Costs live in
``[0, +inf]`` after normalization, potentials in ``[-inf, +inf)``.  The helpers
below raise :class:`~otcert.errors.UndefinedArithmetic` instead of ever
producing NaN.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Union

from .errors import InputError, ModeError, UndefinedArithmetic

Number = Union[int, float, Fraction]

RATIONAL = "rational"
FLOAT = "float"
MODES = (RATIONAL, FLOAT)

INF = float("inf")
NEG_INF = float("-inf")

#: Comparison tolerance in float mode.
TOL = 1e-9


def is_pos_inf(x: Number) -> bool:
    return isinstance(x, float) and x == INF


def is_neg_inf(x: Number) -> bool:
    return isinstance(x, float) and x == NEG_INF


def is_finite(x: Number) -> bool:
    if isinstance(x, float):
        return math.isfinite(x)
    return True


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise InputError(f"unknown number mode {mode!r}; expected one of {MODES}")
    return mode


def require_same_mode(*objs) -> str:
    """Return the shared ``.mode`` of the arguments, raising on a mix."""
    modes = {o.mode for o in objs}
    if len(modes) != 1:
        raise ModeError(f"mixed number modes in one operation: {sorted(modes)}")
    return modes.pop()


def as_number(x, mode: str) -> Number:
    """Coerce ``x`` into the finite-number representation of ``mode``.

    Accepts ints, Fractions, floats and strings such as ``"3/4"``.  Infinities
    pass through unchanged (they are mode-independent).  NaN is rejected.
    """
    if isinstance(x, float):
        if math.isnan(x):
            raise InputError("NaN is not a valid value")
        if math.isinf(x):
            return x
    if isinstance(x, str):
        s = x.strip()
        if s == "inf":
            return INF
        if s == "-inf":
            return NEG_INF
        x = Fraction(s)
    if mode == RATIONAL:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, float):
            # Exact: every finite float is a dyadic rational.
            return Fraction(x)
        raise InputError(f"cannot interpret {x!r} as a rational number")
    else:
        return float(x)


def ext_add(a: Number, b: Number) -> Number:
    """Extended-real addition; ``(+inf) + (-inf)`` is a hard error."""
    pa, na = is_pos_inf(a), is_neg_inf(a)
    pb, nb = is_pos_inf(b), is_neg_inf(b)
    if (pa and nb) or (na and pb):
        raise UndefinedArithmetic("(+inf) + (-inf) is undefined")
    if pa or pb:
        return INF
    if na or nb:
        return NEG_INF
    return a + b


def ext_sub(a: Number, b: Number) -> Number:
    """Extended-real subtraction; ``(+inf) - (+inf)`` and ``(-inf) - (-inf)`` are hard errors."""
    pa, na = is_pos_inf(a), is_neg_inf(a)
    pb, nb = is_pos_inf(b), is_neg_inf(b)
    if (pa and pb) or (na and nb):
        raise UndefinedArithmetic("inf - inf of equal signs is undefined")
    if pa or nb:
        return INF
    if na or pb:
        return NEG_INF
    return a - b


def ext_mul_weight(w: Number, c: Number) -> Number:
    """Product of a strictly positive weight with a cost in ``[0, +inf]``."""
    if is_pos_inf(c):
        return INF
    return w * c


def ext_sum(values: Iterable[Number]) -> Number:
    total: Number = 0
    for v in values:
        total = ext_add(total, v)
    return total


def numbers_equal(a: Number, b: Number, mode: str) -> bool:
    """Equality test honoring the mode tolerance.  Infinities compare exactly."""
    if not is_finite(a) or not is_finite(b):
        return a == b
    if mode == RATIONAL:
        return a == b
    return abs(a - b) <= TOL


def leq(a: Number, b: Number, mode: str) -> bool:
    """``a <= b`` up to the mode tolerance."""
    if is_neg_inf(a) or is_pos_inf(b):
        return True
    if is_pos_inf(a) or is_neg_inf(b):
        return False
    if mode == RATIONAL:
        return a <= b
    return a <= b + TOL


def strictly_less(a: Number, b: Number, mode: str) -> bool:
    """``a < b`` by more than the mode tolerance (exact in rational mode)."""
    if is_neg_inf(a):
        return not is_neg_inf(b)
    if is_pos_inf(b):
        return not is_pos_inf(a)
    if is_pos_inf(a) or is_neg_inf(b):
        return False
    if mode == RATIONAL:
        return a < b
    return a < b - TOL


def format_number(x: Number) -> str:
    """Serialization form: ``"inf"``, ``"-inf"``, ``"p/q"`` or a decimal literal."""
    if is_pos_inf(x):
        return "inf"
    if is_neg_inf(x):
        return "-inf"
    if isinstance(x, Fraction):
        return str(x)
    return repr(x)
