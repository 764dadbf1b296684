"""Scalars and the real sequences (a_n), (b_h) that parametrize weight families.

Scalars are either exact (``int``/``Fraction``) or ``float``.  A sequence is a
callable ``n -> scalar`` that also knows enough about itself (supremum,
summability, growth) for the boundary classifiers to reason analytically.

Preset grammar, as accepted by :func:`parse_sequence`::

    const:c          a_n = c
    linear:c,d       a_n = c*n + d
    power:beta       a_n = (n+1)**beta      (shifted so that a_0 = 1 > 0)
    geom:c,r[,d]     a_n = c*r**n + d
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from .errors import InvalidParameter, NonPositiveWeight, SequenceExhausted

Scalar = Union[int, Fraction, float]

EXACT = "exact"
FLOAT = "float"


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def parse_scalar(text, exact: bool = False) -> Scalar:
    """Parse ``p/q``, integers and decimals.

    Integers and ``p/q`` literals are exact.  Decimals are floats unless
    ``exact`` is set, in which case the decimal string is rationalized exactly
    (``"0.1" -> 1/10``).  Non-finite values are rejected.
    """
    if is_exact(text) or isinstance(text, float):
        return text
    s = str(text).strip()
    if not s:
        raise InvalidParameter("empty scalar")
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            return Fraction(int(num), int(den))
        try:
            return int(s)
        except ValueError:
            pass
        if exact:
            return Fraction(s)
        x = float(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidParameter(f"cannot parse scalar {text!r}") from exc
    if not math.isfinite(x):
        raise InvalidParameter(f"non-finite scalar {text!r}")
    return x


def as_mode(x: Scalar, mode: str) -> Scalar:
    """Cast ``x`` to the scalar type of ``mode``; floats are refused in exact mode."""
    if mode == FLOAT:
        return float(x)
    if is_exact(x):
        return Fraction(x)
    raise InvalidParameter(f"value {x!r} is not rational; exact mode needs int or p/q input")


def format_scalar(x: Scalar) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def _pow(base: Scalar, n: int) -> Scalar:
    if is_exact(base):
        return Fraction(base) ** n
    return float(base) ** n


class Sequence:
    """Base class for a sequence n -> value, n = 0, 1, 2, ..."""

    kind = "sequence"

    def __call__(self, n: int) -> Scalar:
        raise NotImplementedError

    @property
    def exact(self) -> bool:
        raise NotImplementedError

    def sup(self) -> Optional[float]:
        """Supremum over n >= 0 (``math.inf`` if unbounded, ``None`` if unknown)."""
        return None

    def summable(self) -> Optional[bool]:
        """Whether sum_n |value| converges; ``None`` if it cannot be decided."""
        return None

    def spec(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.spec()


@dataclass(frozen=True)
class Const(Sequence):
    c: Scalar
    kind = "const"

    def __call__(self, n):
        return self.c

    @property
    def exact(self):
        return is_exact(self.c)

    def sup(self):
        return float(self.c)

    def summable(self):
        return self.c == 0

    def spec(self):
        return f"const:{format_scalar(self.c)}"


@dataclass(frozen=True)
class Linear(Sequence):
    """c*n + d."""

    c: Scalar
    d: Scalar
    kind = "linear"

    def __call__(self, n):
        return self.c * n + self.d

    @property
    def exact(self):
        return is_exact(self.c) and is_exact(self.d)

    def sup(self):
        if self.c > 0:
            return math.inf
        return float(self.d)

    def summable(self):
        return self.c == 0 and self.d == 0

    def spec(self):
        return f"linear:{format_scalar(self.c)},{format_scalar(self.d)}"


@dataclass(frozen=True)
class Power(Sequence):
    """(n+1)**beta; exact only for integer beta."""

    beta: Scalar
    kind = "power"

    def __call__(self, n):
        if self.exact:
            return Fraction(n + 1) ** int(self.beta)
        return float(n + 1) ** float(self.beta)

    @property
    def exact(self):
        return is_exact(self.beta) and Fraction(self.beta).denominator == 1

    def sup(self):
        return math.inf if self.beta > 0 else 1.0

    def summable(self):
        return self.beta < -1

    def spec(self):
        return f"power:{format_scalar(self.beta)}"


@dataclass(frozen=True)
class Geometric(Sequence):
    """c*r**n + d with r > 0."""

    c: Scalar
    r: Scalar
    d: Scalar = 0
    kind = "geom"

    def __post_init__(self):
        if not self.r > 0:
            raise InvalidParameter(f"geometric ratio must be > 0, got {self.r}")

    def __call__(self, n):
        return self.c * _pow(self.r, n) + self.d

    @property
    def exact(self):
        return is_exact(self.c) and is_exact(self.r) and is_exact(self.d)

    def sup(self):
        c, r, d = float(self.c), float(self.r), float(self.d)
        if r > 1 and c > 0:
            return math.inf
        if r == 1 or (r > 1 and c <= 0) or (r < 1 and c >= 0):
            return c + d
        return d  # r < 1, c < 0: increases to d, not attained

    def summable(self):
        return self.d == 0 and (self.c == 0 or self.r < 1)

    def spec(self):
        s = f"geom:{format_scalar(self.c)},{format_scalar(self.r)}"
        if self.d != 0:
            s += f",{format_scalar(self.d)}"
        return s


@dataclass(frozen=True)
class FileSequence(Sequence):
    """Finite table of values with an optional preset ``tail`` used beyond it.

    Without a tail, querying past the last row raises :class:`SequenceExhausted`.
    The tail is evaluated at the absolute index n.
    """

    values: tuple
    tail: Optional[Sequence] = None
    source: str = "<memory>"
    kind = "file"

    def __call__(self, n):
        if n < len(self.values):
            return self.values[n]
        if self.tail is None:
            raise SequenceExhausted(
                f"sequence from {self.source} has {len(self.values)} rows; index {n} requested"
            )
        return self.tail(n)

    def __len__(self):
        return len(self.values)

    @property
    def exact(self):
        return all(is_exact(v) for v in self.values) and (self.tail is None or self.tail.exact)

    def sup(self):
        head = max((float(v) for v in self.values), default=-math.inf)
        if self.tail is None:
            return None
        ts = self.tail.sup()
        return None if ts is None else max(head, ts)

    def summable(self):
        return None if self.tail is None else self.tail.summable()

    def spec(self):
        s = f"file:{self.source}"
        if self.tail is not None:
            s += f"+{self.tail.spec()}"
        return s


def parse_sequence(text: str, exact: bool = False) -> Sequence:
    """Parse a preset string (see module docstring)."""
    if isinstance(text, Sequence):
        return text
    try:
        kind, _, rest = str(text).partition(":")
        args = [parse_scalar(a, exact) for a in rest.split(",")] if rest else []
        kind = kind.strip().lower()
        if kind == "const" and len(args) == 1:
            return Const(*args)
        if kind == "linear" and len(args) == 2:
            return Linear(*args)
        if kind == "power" and len(args) == 1:
            return Power(*args)
        if kind in ("geom", "geometric") and len(args) in (2, 3):
            return Geometric(*args)
    except InvalidParameter:
        raise
    raise InvalidParameter(f"unrecognized sequence spec {text!r}")


def read_sequence_csv(path, tail: Optional[Sequence] = None, exact: bool = False) -> FileSequence:
    """Read ``n,value`` (or ``h,value``) rows; indices must be 0..len-1 in order."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidParameter(f"{path}: empty sequence file")
    header = [c.strip().lower() for c in rows[0]]
    if header not in (["n", "value"], ["h", "value"]):
        raise InvalidParameter(f"{path}: expected header 'n,value' or 'h,value', got {rows[0]}")
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 2:
            raise InvalidParameter(f"{path}:{lineno}: expected 2 columns")
        idx = int(row[0])
        if idx != len(values):
            raise InvalidParameter(f"{path}:{lineno}: index {idx} out of order")
        values.append(parse_scalar(row[1], exact))
    return FileSequence(tuple(values), tail=tail, source=str(path))


@dataclass(frozen=True)
class GridTable:
    """Weights tabulated on grid points, read from ``h,t,value`` CSV files."""

    values: dict = field(hash=False)
    source: str = "<memory>"

    def __call__(self, h, t):
        try:
            return self.values[(h, t)]
        except KeyError:
            raise SequenceExhausted(f"{self.source}: no weight tabulated at ({h},{t})") from None

    @property
    def exact(self):
        return all(is_exact(v) for v in self.values.values())

    def spec(self):
        return f"file:{self.source}"


def read_grid_csv(path, exact: bool = False, which: str = "w") -> GridTable:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip().lower() for c in rows[0]] != ["h", "t", "value"]:
        raise InvalidParameter(f"{path}: expected header 'h,t,value'")
    values = {}
    for row in rows[1:]:
        if not row:
            continue
        h, t, v = int(row[0]), int(row[1]), parse_scalar(row[2], exact)
        if not v > 0:
            raise NonPositiveWeight(h, t, v, which)
        values[(h, t)] = v
    return GridTable(values, source=str(path))
