"""Independent oracles used to freeze expected values.

Everything here recomputes results along a different path than the library:
rank via minor enumeration and the Pfaffian, brackets via full ordered-pair
summation, the graded bracket via a free Laurent expansion that keeps the
separate multiplication by s.  Keep these independent of the code under test.
"""

from fractions import Fraction

from momentkit.algebra import TPoly


def det(rows):
    n = len(rows)
    if n == 0:
        return Fraction(1)
    if n == 1:
        return rows[0][0]
    total = Fraction(0)
    for j in range(n):
        if rows[0][j] == 0:
            continue
        minor = [[row[c] for c in range(n) if c != j] for row in rows[1:]]
        sign = -1 if j % 2 else 1
        total += sign * rows[0][j] * det(minor)
    return total


def rank_by_minors(rows):
    """Largest k with a nonsingular k x k submatrix (exponential; tiny inputs)."""
    from itertools import combinations

    n = len(rows)
    m = len(rows[0]) if rows else 0
    for size in range(min(n, m), 0, -1):
        for rsel in combinations(range(n), size):
            for csel in combinations(range(m), size):
                sub = [[rows[r][c] for c in csel] for r in rsel]
                if det(sub) != 0:
                    return size
    return 0


def pfaffian(rows):
    """Pfaffian of an even-dimensional antisymmetric matrix, by expansion."""
    n = len(rows)
    assert n % 2 == 0
    if n == 0:
        return Fraction(1)
    if n == 2:
        return rows[0][1]
    total = Fraction(0)
    for j in range(1, n):
        if rows[0][j] == 0:
            continue
        keep = [r for r in range(1, n) if r != j]
        minor = [[rows[r][c] for c in keep] for r in keep]
        sign = -1 if j % 2 == 0 else 1
        total += sign * rows[0][j] * pfaffian(minor)
    return total


def bracket_by_pairs(structure, f, g):
    """{f,g} summed over all ordered generator pairs (i != j).

    The production code sums antisymmetrized terms over i < j; this variant
    uses the full table and single products.
    """
    gens = structure.ring.gens
    result = TPoly.constant(structure.ring, 0, structure.order)
    for a in gens:
        for b in gens:
            if a == b:
                continue
            entry = structure.gen_bracket(a, b)
            if entry.is_zero():
                continue
            result = result + entry * f.diff(a) * g.diff(b)
    return result


def laurent_add(a, b):
    out = dict(a)
    for d, v in b.items():
        out[d] = out.get(d, 0) + v if d in out else v
    return {d: v for d, v in out.items() if not v.is_zero()}


def tot_bracket_free_laurent(line, p, f, q, g):
    """{f s^p, g s^q} with the explicit step at s^(p+q-1) times a final s.

    Expansion in the free Laurent algebra: the base-bracket part lands at
    s^(p+q) directly, while the module parts are first placed at s^(p+q-1)
    and then multiplied by one more power of s.  Coefficients are handled at
    the module order throughout except for a pure degree-0 pair.
    """
    low = line.module_order
    if p == 0 and q == 0:
        return {0: line.base.bracket(f, g)}
    base_low = line.base.restrict(low)
    f_low = f.truncate(low) if f.order > low else f
    g_low = g.truncate(low) if g.order > low else g
    alpha_f = line.alpha_apply(f) if p == 0 else line.partial_alpha(f)
    alpha_g = line.alpha_apply(g) if q == 0 else line.partial_alpha(g)
    direct = {p + q: base_low.bracket(f_low, g_low)}
    lower = {p + q - 1: g_low * alpha_f * q - f_low * alpha_g * p}
    # multiply the lower part by s: shift every degree up by one
    shifted = {d + 1: v for d, v in lower.items() if not v.is_zero()}
    out = dict(direct)
    for d, v in shifted.items():
        out[d] = out.get(d, TPoly.constant(line.ring, 0, low)) + v
    return {d: v for d, v in out.items() if not v.is_zero()}
