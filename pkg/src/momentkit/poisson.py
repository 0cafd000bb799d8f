"""Poisson structures on truncated polynomial rings.

A structure stores the brackets {x_i, x_j} between ring generators only; the
deformation parameter t is central by construction (it never appears as a
bracket slot) and general brackets are obtained by the biderivation
extension.  Verification is generator-level: the Jacobiator and the conformal
defect are multiderivations once the Leibniz rule holds, so vanishing on
generators is sufficient, and randomized property tests guard that argument
against implementation bugs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union

from .algebra import (
    Derivation,
    GeneratorMismatch,
    OrderMismatch,
    Poly,
    PolyRing,
    Rat,
    RatLike,
    TPoly,
    exact_rank,
)
from .reporting import Check, Finding


@dataclass(frozen=True)
class Point:
    """A rational point: values for every generator, optionally s and t."""

    values: Mapping[str, Rat]
    s: Rat | None = None
    t: Rat = Fraction(0)

    def __post_init__(self):
        if self.s is not None and self.s == 0:
            raise ValueError("the s-coordinate of a point must be nonzero")


class PoissonStructure:
    """Antisymmetric generator bracket table over A[t]/t^(N+1), t central."""

    def __init__(
        self,
        ring: PolyRing,
        order: int,
        table: Mapping[tuple[str, str], Union[TPoly, Poly, RatLike]],
    ):
        self.ring = ring
        self.order = order
        self._table: dict[tuple[int, int], TPoly] = {}
        declared: set[tuple[int, int]] = set()
        for (a, b), value in table.items():
            i, j = ring.index(a), ring.index(b)
            if i == j:
                raise GeneratorMismatch(f"bracket {{{a},{b}}} needs distinct generators")
            entry = self._coerce(value)
            if i > j:
                i, j, entry = j, i, -entry
            if (i, j) in declared:
                raise GeneratorMismatch(f"duplicate bracket declaration for ({a},{b})")
            declared.add((i, j))
            if not entry.is_zero():
                self._table[(i, j)] = entry

    def _coerce(self, value: Union[TPoly, Poly, RatLike]) -> TPoly:
        if isinstance(value, TPoly):
            if value.ring != self.ring:
                raise GeneratorMismatch("bracket entry from a different ring")
            if value.order != self.order:
                raise OrderMismatch(
                    f"bracket entry at order {value.order}, expected {self.order}"
                )
            return value
        if isinstance(value, Poly):
            return TPoly.from_poly(value, self.order)
        return TPoly.constant(self.ring, value, self.order)

    def gen_bracket(self, a: str, b: str) -> TPoly:
        """{a, b} for generators a, b."""
        i, j = self.ring.index(a), self.ring.index(b)
        if i == j:
            return TPoly.constant(self.ring, 0, self.order)
        if i < j:
            entry = self._table.get((i, j))
            return entry if entry is not None else TPoly.constant(self.ring, 0, self.order)
        entry = self._table.get((j, i))
        return -entry if entry is not None else TPoly.constant(self.ring, 0, self.order)

    def table_items(self) -> list[tuple[tuple[str, str], TPoly]]:
        gens = self.ring.gens
        return [((gens[i], gens[j]), v) for (i, j), v in sorted(self._table.items())]

    def base_table(self) -> dict[tuple[str, str], Poly]:
        """The order-0 restriction of the table, as plain polynomials."""
        return {pair: value.coefficient(0) for pair, value in self.table_items()}

    def restrict(self, order: int) -> PoissonStructure:
        return PoissonStructure(
            self.ring,
            order,
            {pair: value.truncate(order) for pair, value in self.table_items()},
        )

    def zero_tpoly(self) -> TPoly:
        return TPoly.constant(self.ring, 0, self.order)

    # -- bracket evaluation ------------------------------------------------

    def bracket(self, f: Union[TPoly, Poly], g: Union[TPoly, Poly]) -> TPoly:
        """Biderivation extension of the table; t-coefficients are central scalars.

        {f,g} = sum over i<j of B[i][j] * (df/dx_i dg/dx_j - df/dx_j dg/dx_i).
        """
        f = self._coerce(f)
        g = self._coerce(g)
        result = self.zero_tpoly()
        gens = self.ring.gens
        for (i, j), entry in self._table.items():
            a, b = gens[i], gens[j]
            mixed = f.diff(a) * g.diff(b) - f.diff(b) * g.diff(a)
            if not mixed.is_zero():
                result = result + entry * mixed
        return result

    def jacobiator(
        self,
        f: Union[TPoly, Poly],
        g: Union[TPoly, Poly],
        h: Union[TPoly, Poly],
    ) -> TPoly:
        """{f,{g,h}} + {g,{h,f}} + {h,{f,g}}, exactly."""
        return (
            self.bracket(f, self.bracket(g, h))
            + self.bracket(g, self.bracket(h, f))
            + self.bracket(h, self.bracket(f, g))
        )

    def hamiltonian_field(self, f: Union[TPoly, Poly]) -> Derivation:
        """The derivation g -> {f, g}."""
        f = self._coerce(f)
        return Derivation(
            self.ring,
            self.order,
            {g: self.bracket(f, TPoly.generator(self.ring, g, self.order)) for g in self.ring.gens},
        )

    def is_central(self, f: Union[TPoly, Poly]) -> bool:
        """True iff {f, x_i} = 0 for every generator (sufficient by Leibniz)."""
        f = self._coerce(f)
        return all(
            self.bracket(f, TPoly.generator(self.ring, g, self.order)).is_zero()
            for g in self.ring.gens
        )

    # -- verification --------------------------------------------------------

    def verify_jacobi(self) -> Check:
        gens = self.ring.gens
        findings = []
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                for l in range(j + 1, len(gens)):
                    res = self.jacobiator(
                        TPoly.generator(self.ring, gens[i], self.order),
                        TPoly.generator(self.ring, gens[j], self.order),
                        TPoly.generator(self.ring, gens[l], self.order),
                    )
                    if not res.is_zero():
                        findings.append(Finding((gens[i], gens[j], gens[l]), str(res)))
        return Check("jacobi", not findings, tuple(findings))

    def verify_conformal(self, cf: ConformalField) -> Check:
        """Check xi({a,b}) = {xi a, b} + {a, xi b} + weight*{a,b} on generator pairs.

        Generator pairs suffice because the defect is a biderivation.
        """
        xi = cf.xi
        if xi.ring != self.ring:
            raise GeneratorMismatch("conformal field over a different ring")
        if xi.order != self.order:
            raise OrderMismatch("conformal field at a different order")
        gens = self.ring.gens
        findings = []
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                a = TPoly.generator(self.ring, gens[i], self.order)
                b = TPoly.generator(self.ring, gens[j], self.order)
                defect = (
                    xi.apply(self.bracket(a, b))
                    - self.bracket(xi.value(gens[i]), b)
                    - self.bracket(a, xi.value(gens[j]))
                    - self.bracket(a, b) * cf.weight
                )
                if not defect.is_zero():
                    findings.append(Finding((gens[i], gens[j]), str(defect)))
        return Check("conformal", not findings, tuple(findings))

    def solve_conformal_weight(self, xi: Derivation) -> Rat | None:
        """Solve for the weight on a pair with a nonzero constant bracket.

        Returns None when no such pair exists or when no constant weight
        satisfies that pair; the weight is not unique for degenerate brackets,
        so callers needing certainty should pass an explicit weight to
        verify_conformal.
        """
        gens = self.ring.gens
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                a = TPoly.generator(self.ring, gens[i], self.order)
                b = TPoly.generator(self.ring, gens[j], self.order)
                bracket = self.bracket(a, b)
                c = bracket.constant_value()
                if c is None or c == 0:
                    continue
                numerator = (
                    xi.apply(bracket)
                    - self.bracket(xi.value(gens[i]), b)
                    - self.bracket(a, xi.value(gens[j]))
                )
                value = numerator.constant_value()
                if value is None:
                    return None
                return value / c
        return None

    # -- pointwise rank --------------------------------------------------------

    def bivector_matrix(self, pt: Point) -> list[list[Rat]]:
        gens = self.ring.gens
        matrix = [[Fraction(0)] * len(gens) for _ in gens]
        for (i, j), entry in self._table.items():
            value = entry.evaluate(pt.values, pt.t)
            matrix[i][j] = value
            matrix[j][i] = -value
        return matrix

    def bivector_rank(self, pt: Point) -> int:
        """Rank at pt of the antisymmetric generator-bracket matrix; always even."""
        return exact_rank(self.bivector_matrix(pt))

    def __repr__(self) -> str:
        inner = ", ".join(f"{{{a},{b}}}={v}" for (a, b), v in self.table_items())
        return f"<PoissonStructure order={self.order} {inner or '0'}>"


@dataclass(frozen=True)
class ConformalField:
    """A derivation xi with xi{f,g} = {xi f,g} + {f,xi g} + weight*{f,g}."""

    xi: Derivation
    weight: Rat = field(default_factory=lambda: Fraction(0))
