"""Tiny exact simplex over Fraction, enough for Legendrian feasibility systems.

Solves:  maximize t  subject to  A x + a t <= b  with x free, t free,
all coefficients rational. Used as a max-margin feasibility oracle: the
constraint system {C x > 0} is feasible iff max t s.t. C x >= t, |x_i| <= M,
t <= 1 has optimum > 0.
"""

from __future__ import annotations

from fractions import Fraction


def maximize(objective, constraints, nvars):
    """Maximize objective . x subject to constraints [(row, rhs)] meaning
    row . x <= rhs, with x free.  Returns (value, x) or raises on unbounded.

    Implementation: split free variables into differences of nonnegatives and
    run primal simplex with Bland's rule on the standard tableau.
    """
    n = 2 * nvars
    rows = []
    rhs = []
    for row, b in constraints:
        r = []
        for c in row:
            r.extend((Fraction(c), Fraction(-c)))
        rows.append(r)
        rhs.append(Fraction(b))
    obj = []
    for c in objective:
        obj.extend((Fraction(c), Fraction(-c)))

    m = len(rows)
    # tableau with slack variables; rhs must be >= 0 -- use Big-M phase-1 free
    # approach: since x = 0 is feasible iff all rhs >= 0. Our systems always
    # include constraints with negative rhs? No: rows are of the form
    # -(C x) + t <= 0 and bounds, x=0,t=0 feasible. Keep simple: require b>=0.
    for b in rhs:
        if b < 0:
            raise ValueError("standard-form rhs must be >= 0")
    # tableau: [A | I | b], cost row
    tab = [r + [Fraction(1) if i == j else Fraction(0) for j in range(m)] + [rhs[i]]
           for i, r in enumerate(rows)]
    cost = [-c for c in obj] + [Fraction(0)] * m + [Fraction(0)]
    basis = [n + i for i in range(m)]
    total = n + m
    it = 0
    while True:
        it += 1
        if it > 20000:
            raise RuntimeError("simplex iteration budget exceeded")
        enter = next((j for j in range(total) if cost[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            if tab[i][enter] > 0:
                ratio = tab[i][total] / tab[i][enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise RuntimeError("unbounded LP")
        piv = best[1]
        pv = tab[piv][enter]
        tab[piv] = [x / pv for x in tab[piv]]
        for i in range(m):
            if i != piv and tab[i][enter]:
                f = tab[i][enter]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[piv])]
        if cost[enter]:
            f = cost[enter]
            cost = [x - f * y for x, y in zip(cost, tab[piv])]
        basis[piv] = enter
    x = [Fraction(0)] * total
    for i, b in enumerate(basis):
        x[b] = tab[i][total]
    sol = [x[2 * i] - x[2 * i + 1] for i in range(nvars)]
    value = sum(c * v for c, v in zip(objective, sol))
    return value, sol


def strict_interior_point(rows, nvars, bound=1000):
    """Find x with row . x > 0 for every row, |x_i| <= bound.

    Returns the max-margin x (margin normalized to <= 1) or None if infeasible.
    """
    # variables: x_0..x_{nvars-1}, t  (index nvars)
    constraints = []
    for row in rows:
        r = list(row) + [Fraction(1)]
        constraints.append(([-c for c in r[:-1]] + [r[-1]], Fraction(0)))  # t - row.x <= 0
    for i in range(nvars):
        e = [Fraction(0)] * (nvars + 1)
        e[i] = Fraction(1)
        constraints.append((list(e), Fraction(bound)))
        e2 = [Fraction(0)] * (nvars + 1)
        e2[i] = Fraction(-1)
        constraints.append((list(e2), Fraction(bound)))
    tcap = [Fraction(0)] * (nvars + 1)
    tcap[nvars] = Fraction(1)
    constraints.append((tcap, Fraction(1)))
    obj = [Fraction(0)] * (nvars + 1)
    obj[nvars] = Fraction(1)
    value, sol = maximize(obj, constraints, nvars + 1)
    if value <= 0:
        return None
    return sol[:nvars]
