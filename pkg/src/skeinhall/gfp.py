"""Linear algebra over prime fields F_p and invariant factors of invertible
matrices, i.e. isomorphism classes of finite-dimensional K[x^{+-1}]-modules.

Matrices are tuples of row tuples of ints in [0, p); all operations are exact.
Dimensions stay small (<= 8), so everything is dense and direct.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# matrices over F_p


def mat(rows, p):
    return tuple(tuple(x % p for x in r) for r in rows)


def identity(n, p):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def zeros(n, m):
    return tuple((0,) * m for _ in range(n))


def mat_mul(a, b, p):
    if not a or not b:
        return tuple(() for _ in a)
    n, k, m = len(a), len(b), len(b[0])
    return tuple(tuple(sum(a[i][t] * b[t][j] for t in range(k)) % p
                       for j in range(m)) for i in range(n))


def mat_add(a, b, p):
    return tuple(tuple((x + y) % p for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(c, a, p):
    return tuple(tuple((c * x) % p for x in r) for r in a)


def mat_vec(a, v, p):
    return tuple(sum(x * y for x, y in zip(r, v)) % p for r in a)


def rref(m, p):
    """Row-reduced echelon form; returns (rref, pivot column list)."""
    m = [list(r) for r in m]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] % p != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], p - 2, p)
        m[r] = [(x * inv) % p for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] % p:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return tuple(tuple(row) for row in m), pivots


def rank(m, p):
    return len(rref(m, p)[1])


def kernel_basis(m, p):
    """Basis of the null space of m, rows of the returned tuple, in RREF."""
    if not m:
        return ()
    cols = len(m[0])
    red, pivots = rref(m, p)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * cols
        v[f] = 1
        for r, c in enumerate(pivots):
            v[c] = (-red[r][f]) % p
        basis.append(tuple(v))
    if not basis:
        return ()
    red2, _ = rref(tuple(basis), p)
    return tuple(r for r in red2 if any(r))


def det(m, p):
    m = [list(r) for r in m]
    n = len(m)
    d = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] % p), None)
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        d = (d * m[c][c]) % p
        inv = pow(m[c][c], p - 2, p)
        for i in range(c + 1, n):
            f = (m[i][c] * inv) % p
            if f:
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[c])]
    return d % p


def mat_inv(m, p):
    n = len(m)
    aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(m)]
    red, piv = rref(tuple(tuple(r) for r in aug), p)
    if piv[:n] != list(range(n)):
        raise ValueError("singular matrix")
    return tuple(tuple(r[n:]) for r in red[:n])


def solve(m, b, p):
    """One solution x of m x = b, or None."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    aug = tuple(tuple(list(r) + [v]) for r, v in zip(m, b))
    red, pivots = rref(aug, p)
    if cols in pivots:
        return None
    x = [0] * cols
    for r, c in enumerate(pivots):
        x[c] = red[r][cols]
    return tuple(x)


def all_vectors(n, p):
    return product(range(p), repeat=n)


# ---------------------------------------------------------------------------
# polynomials over F_p (coefficient tuples, low degree first, monic-normalized)


def poly_trim(a, p):
    a = [x % p for x in a]
    while a and a[-1] == 0:
        a.pop()
    return tuple(a)


def poly_mul(a, b, p):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] = (out[i + j] + ai * bj) % p
    return poly_trim(out, p)


def poly_divmod(a, b, p):
    a = list(a)
    if not b:
        raise ZeroDivisionError
    binv = pow(b[-1], p - 2, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and any(x % p for x in a):
        if a[-1] % p == 0:
            a.pop()
            continue
        sh = len(a) - len(b)
        f = (a[-1] * binv) % p
        q[sh] = f
        for i, bi in enumerate(b):
            a[sh + i] = (a[sh + i] - f * bi) % p
        a.pop()
    return poly_trim(q, p), poly_trim(a, p)


def poly_gcd(a, b, p):
    a, b = poly_trim(a, p), poly_trim(b, p)
    while b:
        a, b = b, poly_divmod(a, b, p)[1]
    if a:
        inv = pow(a[-1], p - 2, p)
        a = tuple((x * inv) % p for x in a)
    return a


def poly_monic(a, p):
    a = poly_trim(a, p)
    if not a:
        return a
    inv = pow(a[-1], p - 2, p)
    return tuple((x * inv) % p for x in a)


def poly_pow_xminus1(k, p):
    out = (1,)
    for _ in range(k):
        out = poly_mul(out, (p - 1, 1), p)
    return out


# ---------------------------------------------------------------------------
# invariant factors


@dataclass(frozen=True)
class ModuleClass:
    """Iso class of a finite-dimensional K[x^{+-1}]-module: the invariant
    factors of the x-action, each dividing the next, none divisible by x."""

    p: int
    invariant_factors: tuple  # tuple of monic coefficient tuples

    def dim(self) -> int:
        return sum(len(f) - 1 for f in self.invariant_factors)

    def is_unipotent(self) -> bool:
        for f in self.invariant_factors:
            k = len(f) - 1
            if f != poly_pow_xminus1(k, self.p):
                return False
        return True

    def direct_sum(self, other: "ModuleClass") -> "ModuleClass":
        assert self.p == other.p
        return module_class_from_matrix(block_diag(self.matrix(), other.matrix()), self.p)

    def matrix(self):
        """A representative matrix: block diagonal of companion matrices."""
        blocks = [companion(f, self.p) for f in self.invariant_factors]
        out = blocks[0] if blocks else ()
        for b in blocks[1:]:
            out = block_diag(out, b)
        return out

    def to_json(self):
        return {"p": self.p, "factors": [list(f) for f in self.invariant_factors]}

    def __str__(self):
        return "ModuleClass(p=%d, factors=%s)" % (self.p, list(map(list, self.invariant_factors)))


def companion(f, p):
    """Companion matrix of a monic polynomial f (column convention:
    x e_j = e_{j+1}, x e_k = -(f_0 e_1 + ... + f_{k-1} e_k))."""
    k = len(f) - 1
    assert k >= 1 and f[-1] == 1
    m = [[0] * k for _ in range(k)]
    for j in range(k - 1):
        m[j + 1][j] = 1
    for i in range(k):
        m[i][k - 1] = (-f[i]) % p
    return tuple(tuple(r) for r in m)


def cmat(values, p):
    """CMAT(a_0,...,a_{k-1}): companion matrix of x^k + a_{k-1}x^{k-1}+...+a_0."""
    f = tuple(v % p for v in values) + (1,)
    return companion(f, p)


def block_diag(a, b):
    n, m = len(a), len(b)
    out = []
    for i in range(n):
        out.append(tuple(a[i]) + (0,) * m)
    for i in range(m):
        out.append((0,) * n + tuple(b[i]))
    return tuple(out)


def char_poly(m, p):
    """Characteristic polynomial via exact Faddeev-LeVerrier over F_p
    (works when p > n is false too: use division-free Berkowitz)."""
    return _berkowitz(m, p)


def _berkowitz(m, p):
    n = len(m)
    if n == 0:
        return (1,)
    # Berkowitz algorithm, division free
    vec = (1, (-m[0][0]) % p)
    for i in range(1, n):
        a = m[i][i]
        row = m[i][:i]
        col = tuple(m[k][i] for k in range(i))
        sub = tuple(tuple(m[r][c] for c in range(i)) for r in range(i))
        # Toeplitz column: [1, -a, -row*col, -row*sub*col, ...]
        t = [1, (-a) % p]
        v = col
        for _ in range(i):
            t.append((-sum(x * y for x, y in zip(row, v))) % p)
            v = mat_vec(sub, v, p)
        new = [0] * (i + 2)
        for k in range(len(vec)):
            for j in range(len(t)):
                if k + j <= i + 1:
                    new[k + j] = (new[k + j] + vec[k] * t[j]) % p
        vec = tuple(new)
    # vec has highest coefficient first; convert to low-first
    return poly_trim(tuple(reversed(vec)), p)


def min_poly(m, p):
    """Minimal polynomial of m over F_p (dims <= 8: iterate vectors)."""
    n = len(m)
    mp = (1,)
    for j in range(n):
        v = tuple(1 if i == j else 0 for i in range(n))
        # minimal polynomial of m relative to v
        basis = []
        vecs = []
        w = v
        while True:
            red, piv = rref(tuple(basis + [w]), p) if basis else ((), [])
            if basis and rank(tuple(basis + [w]), p) == len(basis):
                break
            basis.append(w)
            vecs.append(w)
            w = mat_vec(m, w, p)
            if len(basis) > n:
                break
        # express w in terms of basis
        k = len(vecs)
        cols = tuple(tuple(vecs[j][i] for j in range(k)) for i in range(n))
        sol = solve(cols, w, p)
        rel = poly_trim(tuple((-c) % p for c in sol) + (1,), p)
        mp = poly_lcm(mp, rel, p)
    return mp


def poly_lcm(a, b, p):
    if not a or not b:
        return ()
    g = poly_gcd(a, b, p)
    return poly_monic(poly_divmod(poly_mul(a, b, p), g, p)[0], p)


def invariant_factors(m, p) -> ModuleClass:
    """Invariant factor decomposition of (F_p^k, m), m invertible.

    Computed from the primary decomposition: for each irreducible divisor f of
    the characteristic polynomial, the Jordan-type partition is recovered from
    ranks of powers of f(m); factors are then reassembled largest-first.
    """
    n = len(m)
    if n == 0:
        return ModuleClass(p, ())
    if det(m, p) == 0:
        raise ValueError("matrix must be invertible (x acts invertibly)")
    cp = char_poly(m, p)
    fact = poly_factor(cp, p)
    # for each irreducible f with multiplicity e: partition of e from ranks
    primary = {}
    for f, e in fact.items():
        fm = poly_of_matrix(f, m, p)
        # nullities of fm^j
        nullity = [0]
        pw = identity(n, p)
        for j in range(1, e + 1):
            pw = mat_mul(pw, fm, p)
            nullity.append(n - rank(pw, p))
        d = len(f) - 1
        counts = []  # counts[j] = number of blocks of size >= j+1
        for j in range(1, e + 1):
            counts.append((nullity[j] - nullity[j - 1]) // d)
        # partition: block sizes
        sizes = []
        for j in range(e, 0, -1):
            cnt = counts[j - 1] - (counts[j] if j < e else 0)
            sizes.extend([j] * cnt)
        primary[f] = sorted(sizes, reverse=True)
    # largest invariant factor takes the largest block of each prime, etc.
    height = max(len(v) for v in primary.values())
    factors = []
    for lvl in range(height):
        f_lvl = (1,)
        for f, sizes in primary.items():
            if lvl < len(sizes):
                f_lvl = poly_mul(f_lvl, poly_power(f, sizes[lvl], p), p)
        factors.append(poly_monic(f_lvl, p))
    factors.reverse()  # each divides the next
    return ModuleClass(p, tuple(factors))


def poly_power(f, k, p):
    out = (1,)
    for _ in range(k):
        out = poly_mul(out, f, p)
    return out


def poly_of_matrix(f, m, p):
    n = len(m)
    out = zeros(n, n)
    pw = identity(n, p)
    for c in f:
        if c:
            out = mat_add(out, mat_scale(c, pw, p), p)
        pw = mat_mul(pw, m, p)
    return out


def poly_factor(f, p):
    """Factor a polynomial over F_p into irreducibles (trial by degree;
    degrees <= 8 so brute force over monic polynomials is fine)."""
    f = poly_monic(f, p)
    out: dict = {}
    deg = 1
    while len(f) - 1 > 0:
        if len(f) - 1 < 2 * deg:
            out[f] = out.get(f, 0) + 1
            break
        found = False
        for g in _monic_polys(deg, p):
            if len(g) - 1 == 0:
                continue
            q, r = poly_divmod(f, g, p)
            if not r and _is_irreducible(g, p):
                out[g] = out.get(g, 0) + 1
                f = q
                found = True
                break
        if not found:
            deg += 1
    return out


def _monic_polys(deg, p):
    for coeffs in product(range(p), repeat=deg):
        yield tuple(coeffs) + (1,)


def _is_irreducible(g, p):
    d = len(g) - 1
    if d == 1:
        return True
    for dd in range(1, d // 2 + 1):
        for h in _monic_polys(dd, p):
            if not poly_divmod(g, h, p)[1]:
                return False
    return True
