"""Exact arithmetic core: rationals, sparse multivariate polynomials,
truncated t-polynomials and Leibniz-extended derivations.

Representation notes:

* coefficients are ``fractions.Fraction`` throughout (exported as ``Rat``);
  there is no floating point anywhere in this package,
* a ``Poly`` over a ``PolyRing`` with generators ``(x_1, .., x_k)`` is a
  sparse map from exponent tuples ``(e_1, .., e_k)`` to nonzero rational
  coefficients,
* a ``TPoly`` of order ``N`` is an element ``c_0 + c_1*t + .. + c_N*t^N``
  of ``A[t]/t^(N+1)`` stored as exactly ``N+1`` Poly slots; arithmetic
  truncates above ``t^N``,
* mixing generator lists or truncation orders is an error, never a silent
  coercion.

The canonical text rendering (used by every report and by the model-file
round trip) lists terms by ascending t-power, then graded-lexicographic
descending in the generators, with ``^`` for powers, ``*`` for products and
rationals as ``p/q``.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence, Union

Rat = Fraction

RatLike = Union[Rat, int]


class GeneratorMismatch(ValueError):
    """Operands belong to different polynomial rings."""


class OrderMismatch(ValueError):
    """Operands have different truncation orders."""


class NotAUnit(ValueError):
    """Inversion was attempted on a non-unit truncated polynomial."""


def _as_rat(value: RatLike) -> Rat:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class PolyRing:
    """A polynomial ring over the rationals with a fixed ordered generator list."""

    __slots__ = ("gens", "_index")

    def __init__(self, gens: Sequence[str]):
        gens = tuple(gens)
        if not gens:
            raise ValueError("a ring needs at least one generator")
        if len(set(gens)) != len(gens):
            raise ValueError(f"duplicate generators in {gens}")
        for g in gens:
            if g in ("t", "s"):
                raise ValueError(f"generator name {g!r} is reserved")
        self.gens = gens
        self._index = {g: i for i, g in enumerate(gens)}

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PolyRing) and self.gens == other.gens

    def __hash__(self) -> int:
        return hash(self.gens)

    def __repr__(self) -> str:
        return f"PolyRing({list(self.gens)})"

    def index(self, gen: str) -> int:
        try:
            return self._index[gen]
        except KeyError:
            raise GeneratorMismatch(f"undeclared generator {gen!r} in {self!r}") from None

    @property
    def arity(self) -> int:
        return len(self.gens)

    def zero(self) -> Poly:
        return Poly(self, {})

    def one(self) -> Poly:
        return self.const(1)

    def const(self, value: RatLike) -> Poly:
        c = _as_rat(value)
        if c == 0:
            return Poly(self, {})
        return Poly(self, {(0,) * self.arity: c})

    def var(self, gen: str) -> Poly:
        expo = [0] * self.arity
        expo[self.index(gen)] = 1
        return Poly(self, {tuple(expo): Fraction(1)})

    def poly(self, terms: Mapping[tuple[int, ...], RatLike]) -> Poly:
        return Poly(self, {e: _as_rat(c) for e, c in terms.items()})


class Poly:
    """Sparse exact-rational polynomial; immutable after construction."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: PolyRing, terms: Mapping[tuple[int, ...], Rat]):
        clean: dict[tuple[int, ...], Rat] = {}
        for expo, coeff in terms.items():
            if len(expo) != ring.arity:
                raise GeneratorMismatch(
                    f"exponent vector {expo} does not match arity {ring.arity}"
                )
            if any(e < 0 for e in expo):
                raise ValueError(f"negative exponent in {expo}")
            if coeff != 0:
                clean[expo] = coeff
        self.ring = ring
        self.terms = clean

    # -- ring operations -------------------------------------------------

    def _check(self, other: Poly) -> None:
        if self.ring != other.ring:
            raise GeneratorMismatch(f"mixing rings {self.ring!r} and {other.ring!r}")

    def _coerce(self, other: Union[Poly, RatLike]) -> Poly:
        if isinstance(other, Poly):
            self._check(other)
            return other
        return self.ring.const(other)

    def __add__(self, other: Union[Poly, RatLike]) -> Poly:
        other = self._coerce(other)
        out = dict(self.terms)
        for expo, coeff in other.terms.items():
            out[expo] = out.get(expo, Fraction(0)) + coeff
        return Poly(self.ring, out)

    __radd__ = __add__

    def __neg__(self) -> Poly:
        return Poly(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: Union[Poly, RatLike]) -> Poly:
        return self + (-self._coerce(other))

    def __rsub__(self, other: Union[Poly, RatLike]) -> Poly:
        return (-self) + other

    def __mul__(self, other: Union[Poly, RatLike]) -> Poly:
        if not isinstance(other, Poly):
            c = _as_rat(other)
            return Poly(self.ring, {e: k * c for e, k in self.terms.items()})
        self._check(other)
        out: dict[tuple[int, ...], Rat] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                expo = tuple(a + b for a, b in zip(ea, eb))
                out[expo] = out.get(expo, Fraction(0)) + ca * cb
        return Poly(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Poly:
        if n < 0:
            raise ValueError("negative polynomial power")
        result = self.ring.one()
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # -- structure -------------------------------------------------------

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def constant_value(self) -> Rat | None:
        """The rational this polynomial equals, or None if it is not constant."""
        if not self.terms:
            return Fraction(0)
        zero = (0,) * self.ring.arity
        if set(self.terms) == {zero}:
            return self.terms[zero]
        return None

    def diff(self, gen: str) -> Poly:
        i = self.ring.index(gen)
        out: dict[tuple[int, ...], Rat] = {}
        for expo, coeff in self.terms.items():
            if expo[i] == 0:
                continue
            lower = list(expo)
            lower[i] -= 1
            key = tuple(lower)
            out[key] = out.get(key, Fraction(0)) + coeff * expo[i]
        return Poly(self.ring, out)

    def evaluate(self, values: Mapping[str, RatLike]) -> Rat:
        point = [
            _as_rat(values[g]) if g in values else None for g in self.ring.gens
        ]
        missing = [g for g, v in zip(self.ring.gens, point) if v is None]
        if missing:
            raise GeneratorMismatch(f"point misses generators {missing}")
        total = Fraction(0)
        for expo, coeff in self.terms.items():
            term = coeff
            for v, e in zip(point, expo):
                if e:
                    term *= v**e
            total += term
        return total

    def substitute(self, assignment: Mapping[str, Poly]) -> Poly:
        """Simultaneous substitution generator -> Poly (a ring homomorphism)."""
        values = [assignment.get(g) for g in self.ring.gens]
        missing = [g for g, v in zip(self.ring.gens, values) if v is None]
        if missing:
            raise GeneratorMismatch(f"assignment misses generators {missing}")
        result = self.ring.zero()
        for expo, coeff in self.terms.items():
            term = self.ring.const(coeff)
            for v, e in zip(values, expo):
                if e:
                    term = term * v**e
            result = result + term
        return result

    def __str__(self) -> str:
        return render_terms(self.ring, [(0, e, c) for e, c in self.terms.items()])

    def __repr__(self) -> str:
        return f"<Poly {self}>"


class TPoly:
    """Element of A[t]/t^(N+1): order N and N+1 polynomial coefficient slots."""

    __slots__ = ("ring", "order", "coeffs")

    def __init__(self, ring: PolyRing, order: int, coeffs: Sequence[Poly]):
        if order < 0:
            raise ValueError("truncation order must be nonnegative")
        coeffs = tuple(coeffs)
        if len(coeffs) != order + 1:
            raise OrderMismatch(
                f"order {order} needs {order + 1} coefficient slots, got {len(coeffs)}"
            )
        for c in coeffs:
            if c.ring != ring:
                raise GeneratorMismatch("coefficient from a different ring")
        self.ring = ring
        self.order = order
        self.coeffs = coeffs

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_poly(cls, p: Poly, order: int) -> TPoly:
        pad = [p.ring.zero()] * order
        return cls(p.ring, order, [p, *pad])

    @classmethod
    def constant(cls, ring: PolyRing, value: RatLike, order: int) -> TPoly:
        return cls.from_poly(ring.const(value), order)

    @classmethod
    def generator(cls, ring: PolyRing, gen: str, order: int) -> TPoly:
        return cls.from_poly(ring.var(gen), order)

    @classmethod
    def t(cls, ring: PolyRing, order: int) -> TPoly:
        if order < 1:
            raise OrderMismatch("t vanishes at truncation order 0")
        coeffs = [ring.zero()] * (order + 1)
        coeffs[1] = ring.one()
        return cls(ring, order, coeffs)

    @classmethod
    def build(cls, ring: PolyRing, order: int, coeffs: Mapping[int, Poly]) -> TPoly:
        slots = [ring.zero()] * (order + 1)
        for k, p in coeffs.items():
            if not 0 <= k <= order:
                raise OrderMismatch(f"t^{k} slot outside order {order}")
            slots[k] = p
        return cls(ring, order, slots)

    # -- ring operations -------------------------------------------------

    def _check(self, other: TPoly) -> None:
        if self.ring != other.ring:
            raise GeneratorMismatch(f"mixing rings {self.ring!r} and {other.ring!r}")
        if self.order != other.order:
            raise OrderMismatch(f"mixing orders {self.order} and {other.order}")

    def _coerce(self, other: Union[TPoly, Poly, RatLike]) -> TPoly:
        if isinstance(other, TPoly):
            self._check(other)
            return other
        if isinstance(other, Poly):
            if other.ring != self.ring:
                raise GeneratorMismatch("mixing rings")
            return TPoly.from_poly(other, self.order)
        return TPoly.constant(self.ring, other, self.order)

    def __add__(self, other: Union[TPoly, Poly, RatLike]) -> TPoly:
        other = self._coerce(other)
        return TPoly(
            self.ring, self.order, [a + b for a, b in zip(self.coeffs, other.coeffs)]
        )

    __radd__ = __add__

    def __neg__(self) -> TPoly:
        return TPoly(self.ring, self.order, [-c for c in self.coeffs])

    def __sub__(self, other: Union[TPoly, Poly, RatLike]) -> TPoly:
        return self + (-self._coerce(other))

    def __rsub__(self, other: Union[TPoly, Poly, RatLike]) -> TPoly:
        return (-self) + other

    def __mul__(self, other: Union[TPoly, Poly, RatLike]) -> TPoly:
        if isinstance(other, (int, Fraction)):
            c = _as_rat(other)
            return TPoly(self.ring, self.order, [p * c for p in self.coeffs])
        other = self._coerce(other)
        slots = [self.ring.zero() for _ in range(self.order + 1)]
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if i + j > self.order:
                    break
                if b.is_zero():
                    continue
                slots[i + j] = slots[i + j] + a * b
        return TPoly(self.ring, self.order, slots)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> TPoly:
        if n < 0:
            raise ValueError("negative power; use invert_unit for units")
        result = TPoly.constant(self.ring, 1, self.order)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction, Poly)):
            other = self._coerce(other)
        if not isinstance(other, TPoly):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    # -- structure -------------------------------------------------------

    def coefficient(self, k: int) -> Poly:
        return self.coeffs[k]

    def t_order(self) -> int | None:
        """Lowest k with a nonzero t^k coefficient, or None for 0."""
        for k, c in enumerate(self.coeffs):
            if not c.is_zero():
                return k
        return None

    def t_degree(self) -> int:
        """Highest k with a nonzero t^k coefficient (0 for the zero element)."""
        for k in range(self.order, -1, -1):
            if not self.coeffs[k].is_zero():
                return k
        return 0

    def truncate(self, order: int) -> TPoly:
        if order > self.order:
            raise OrderMismatch(f"cannot truncate order {self.order} up to {order}")
        return TPoly(self.ring, order, self.coeffs[: order + 1])

    def lift(self, order: int) -> TPoly:
        """Canonical inclusion into a higher order (new t-slots are zero)."""
        if order < self.order:
            raise OrderMismatch(f"cannot lift order {self.order} down to {order}")
        pad = [self.ring.zero()] * (order - self.order)
        return TPoly(self.ring, order, [*self.coeffs, *pad])

    def t_shift(self, k: int) -> TPoly:
        """Multiplication by t^k with truncation."""
        slots = [self.ring.zero()] * (self.order + 1)
        for i, c in enumerate(self.coeffs):
            if i + k <= self.order:
                slots[i + k] = c
        return TPoly(self.ring, self.order, slots)

    def constant_value(self) -> Rat | None:
        if any(not c.is_zero() for c in self.coeffs[1:]):
            return None
        return self.coeffs[0].constant_value()

    def is_unit(self) -> bool:
        c0 = self.coeffs[0].constant_value()
        return c0 is not None and c0 != 0

    def diff(self, gen: str) -> TPoly:
        return TPoly(self.ring, self.order, [c.diff(gen) for c in self.coeffs])

    def evaluate(self, values: Mapping[str, RatLike], t_value: RatLike = 0) -> Rat:
        tv = _as_rat(t_value)
        total = Fraction(0)
        power = Fraction(1)
        for c in self.coeffs:
            if not c.is_zero():
                total += c.evaluate(values) * power
            power *= tv
        return total

    def substitute(self, assignment: Mapping[str, TPoly]) -> TPoly:
        """Simultaneous substitution generator -> TPoly, truncated; t maps to t."""
        values: list[TPoly] = []
        for g in self.ring.gens:
            v = assignment.get(g)
            if v is None:
                raise GeneratorMismatch(f"assignment misses generator {g!r}")
            if v.ring != self.ring:
                raise GeneratorMismatch("assignment value from a different ring")
            if v.order != self.order:
                raise OrderMismatch(
                    f"assignment value at order {v.order}, expected {self.order}"
                )
            values.append(v)
        result = TPoly.constant(self.ring, 0, self.order)
        one = TPoly.constant(self.ring, 1, self.order)
        # Power cache keyed by (generator index, exponent), grown on demand.
        powers: dict[tuple[int, int], TPoly] = {}

        def power_of(i: int, e: int) -> TPoly:
            if e == 0:
                return one
            got = powers.get((i, e))
            if got is None:
                got = power_of(i, e - 1) * values[i]
                powers[(i, e)] = got
            return got

        for k, poly in enumerate(self.coeffs):
            for expo, coeff in poly.terms.items():
                term = TPoly.constant(self.ring, coeff, self.order)
                for i, e in enumerate(expo):
                    if e:
                        term = term * power_of(i, e)
                result = result + term.t_shift(k)
        return result

    def __str__(self) -> str:
        triples = [
            (k, e, c)
            for k, poly in enumerate(self.coeffs)
            for e, c in poly.terms.items()
        ]
        return render_terms(self.ring, triples)

    def __repr__(self) -> str:
        return f"<TPoly[{self.order}] {self}>"


def invert_unit(u: TPoly) -> TPoly:
    """Inverse of a unit c*(1 + t*q) by geometric-series recursion on t-order.

    Accepts exactly the units of A[t]/t^(N+1) for A a polynomial ring over a
    field: the t^0 slot must be a nonzero constant.
    """
    c0 = u.coeffs[0].constant_value()
    if c0 is None:
        raise NotAUnit(f"leading t^0 coefficient {u.coeffs[0]} is not constant")
    if c0 == 0:
        raise NotAUnit("leading t^0 coefficient is zero")
    # u = c0 * (1 + v) with v in t*A[t]; inverse is c0^-1 * sum (-v)^j.
    v = u * (1 / c0) - 1
    result = TPoly.constant(u.ring, 1, u.order)
    term = TPoly.constant(u.ring, 1, u.order)
    for _ in range(u.order):
        term = term * (-v)
        if term.is_zero():
            break
        result = result + term
    return result * (1 / c0)


class Derivation:
    """A k[t]-linear derivation, determined by its values on the generators.

    The Leibniz extension applies to any TPoly of the matching order;
    constants and t itself are killed.
    """

    __slots__ = ("ring", "order", "values")

    def __init__(self, ring: PolyRing, order: int, values: Mapping[str, TPoly]):
        vals: dict[str, TPoly] = {}
        for g in ring.gens:
            v = values.get(g)
            if v is None:
                v = TPoly.constant(ring, 0, order)
            if v.ring != ring:
                raise GeneratorMismatch("derivation value from a different ring")
            if v.order != order:
                raise OrderMismatch(
                    f"derivation value at order {v.order}, expected {order}"
                )
            vals[g] = v
        for g in values:
            ring.index(g)
        self.ring = ring
        self.order = order
        self.values = vals

    def value(self, gen: str) -> TPoly:
        self.ring.index(gen)
        return self.values[gen]

    def apply(self, f: Union[TPoly, Poly]) -> TPoly:
        if isinstance(f, Poly):
            f = TPoly.from_poly(f, self.order)
        if f.ring != self.ring:
            raise GeneratorMismatch("derivation and argument rings differ")
        if f.order != self.order:
            raise OrderMismatch(
                f"derivation at order {self.order} applied to order {f.order}"
            )
        result = TPoly.constant(self.ring, 0, self.order)
        for g in self.ring.gens:
            dg = self.values[g]
            if dg.is_zero():
                continue
            result = result + f.diff(g) * dg
        return result

    def __call__(self, f: Union[TPoly, Poly]) -> TPoly:
        return self.apply(f)

    def truncate(self, order: int) -> Derivation:
        return Derivation(
            self.ring, order, {g: v.truncate(order) for g, v in self.values.items()}
        )

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Derivation):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.order == other.order
            and self.values == other.values
        )

    def __repr__(self) -> str:
        inner = ", ".join(f"{g} -> {v}" for g, v in self.values.items())
        return f"<Derivation {inner}>"


# ---------------------------------------------------------------------------
# canonical rendering


def _monomial_key(expo: tuple[int, ...]) -> tuple:
    # Graded lexicographic, descending: higher total degree first, then
    # earlier generators with higher exponents first.
    return (-sum(expo), tuple(-e for e in expo))


def render_terms(
    ring: PolyRing, triples: Iterable[tuple[int, tuple[int, ...], Rat]]
) -> str:
    ordered = sorted(triples, key=lambda it: (it[0], _monomial_key(it[1])))
    if not ordered:
        return "0"
    chunks: list[str] = []
    for pos, (t_pow, expo, coeff) in enumerate(ordered):
        negative = coeff < 0
        mag = -coeff if negative else coeff
        pieces: list[str] = []
        if t_pow == 1:
            pieces.append("t")
        elif t_pow > 1:
            pieces.append(f"t^{t_pow}")
        for name, e in zip(ring.gens, expo):
            if e == 1:
                pieces.append(name)
            elif e > 1:
                pieces.append(f"{name}^{e}")
        if mag != 1 or not pieces:
            pieces.insert(0, str(mag))
        body = "*".join(pieces)
        if pos == 0:
            chunks.append(f"-{body}" if negative else body)
        else:
            chunks.append(f"- {body}" if negative else f"+ {body}")
    return " ".join(chunks)


# ---------------------------------------------------------------------------
# exact linear algebra


def exact_rank(rows: Sequence[Sequence[Rat]]) -> int:
    """Rank of a rational matrix by fraction-free (Bareiss) elimination.

    Rows are first scaled to integers by their denominator lcm, which does
    not change the rank; the elimination then stays in exact integers.
    """
    matrix: list[list[int]] = []
    for row in rows:
        fracs = [_as_rat(x) for x in row]
        scale = 1
        for x in fracs:
            scale = scale * x.denominator // gcd(scale, x.denominator)
        matrix.append([int(x * scale) for x in fracs])
    if not matrix:
        return 0
    n_rows, n_cols = len(matrix), len(matrix[0])
    rank = 0
    prev_pivot = 1
    row = 0
    for col in range(n_cols):
        pivot_row = next((r for r in range(row, n_rows) if matrix[r][col] != 0), None)
        if pivot_row is None:
            continue
        matrix[row], matrix[pivot_row] = matrix[pivot_row], matrix[row]
        pivot = matrix[row][col]
        for r in range(row + 1, n_rows):
            for c in range(col + 1, n_cols):
                matrix[r][c] = (pivot * matrix[r][c] - matrix[r][col] * matrix[row][c]) // prev_pivot
            matrix[r][col] = 0
        prev_pivot = pivot
        rank += 1
        row += 1
        if row == n_rows:
            break
    return rank
