"""Hall algebra arithmetic at a fixed prime: derived products for type-A
quiver representations and for finite-dimensional Laurent modules.

Objects are finite multisets of shifted pieces: intervals [a,b] for the
A_n context (orientation 1 -> 2 -> ... -> n), or a similarity class of an
invertible matrix per shift for the Laurent context.  The product is

    [A].[C] = (prod_i |Ext^{-i}(C,A)|^{(-1)^{i+1}}) sum_{f in Ext^1(C,A)} [Cone]

with C concentrated in a single shift; the cone of f = (f_ab, f_hom) with
f_hom: C -> A_{s-1} a module map and f_ab an abelian extension class is

    A_(other shifts)  +  coker(f_hom)[s-1]  +  E[s],

where E is the pullback to ker(f_hom) of the extension of C by A_s along
f_ab.  Extension classes are realized as explicit cokernel representatives
from projective resolutions (type A) / the Laurent adjoint complex.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

from . import gfp
from .gfp import ModuleClass, invariant_factors, mat_mul, rank, rref


class HallError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class AnContext:
    n: int
    p: int

    def kind(self):
        return "an"


@dataclass(frozen=True)
class LaurentContext:
    p: int

    def kind(self):
        return "laurent"


# ---------------------------------------------------------------------------
# type A representations


@dataclass(frozen=True)
class AnRep:
    n: int
    p: int
    dims: tuple
    maps: tuple  # maps[i]: matrix M_{i+1} x M_i over F_p, i = 0..n-2

    @staticmethod
    def zero(n, p):
        return AnRep(n, p, (0,) * n, tuple(() for _ in range(n - 1)))

    @staticmethod
    def interval(n, p, a, b):
        dims = tuple(1 if a <= i + 1 <= b else 0 for i in range(n))
        maps = []
        for i in range(n - 1):
            rows = dims[i + 1]
            cols = dims[i]
            m = tuple(tuple(1 if (r == c and dims[i] and dims[i + 1]
                                  and a <= i + 1 and i + 2 <= b) else 0
                            for c in range(cols)) for r in range(rows))
            maps.append(m)
        return AnRep(n, p, dims, tuple(maps))

    def direct_sum(self, other):
        assert (self.n, self.p) == (other.n, other.p)
        dims = tuple(a + b for a, b in zip(self.dims, other.dims))
        maps = []
        for i in range(self.n - 1):
            maps.append(_block_diag_rect(self.maps[i], other.maps[i],
                                         self.dims[i + 1], self.dims[i],
                                         other.dims[i + 1], other.dims[i]))
        return AnRep(self.n, self.p, dims, tuple(maps))

    def total_dim(self):
        return sum(self.dims)

    def composite(self, a, b):
        """Matrix of M_a -> M_b (1-indexed, a <= b)."""
        m = gfp.identity(self.dims[a - 1], self.p)
        for i in range(a - 1, b - 1):
            m = mat_mul(self.maps[i], m, self.p)
        return m

    def decompose(self):
        """Multiset of intervals (a, b) via the rank formula."""
        n = self.n

        def r(a, b):
            if a < 1 or b > n or a > b:
                return 0
            m = self.composite(a, b)
            if not m or not m[0]:
                return 0
            return rank(m, self.p)

        def rr(a, b):
            if a < 1:
                return 0
            if b > n:
                return 0
            return r(a, b)

        out = []
        for a in range(1, n + 1):
            for b in range(a, n + 1):
                mult = rr(a, b) - rr(a - 1, b) - rr(a, b + 1) + rr(a - 1, b + 1)
                assert mult >= 0, "rank formula produced negative multiplicity"
                out.extend([(a, b)] * mult)
        assert sum(bb - aa + 1 for aa, bb in out) == self.total_dim()
        return tuple(sorted(out))


def _block_diag_rect(m1, m2, r1, c1, r2, c2):
    rows = []
    for i in range(r1):
        row = tuple(m1[i]) if c1 else ()
        rows.append(row + (0,) * c2)
    for i in range(r2):
        row = tuple(m2[i]) if c2 else ()
        rows.append((0,) * c1 + row)
    return tuple(rows)


def rep_of_multiset(n, p, intervals):
    rep = AnRep.zero(n, p)
    for a, b in intervals:
        rep = rep.direct_sum(AnRep.interval(n, p, a, b))
    return rep


def an_hom_basis(M: AnRep, N: AnRep):
    """Basis of Hom(M, N): tuples of vertex matrices (phi_1..phi_n)."""
    p = M.p
    n = M.n
    # unknowns: entries of phi_i (N.dims[i] x M.dims[i])
    offs = []
    total = 0
    for i in range(n):
        offs.append(total)
        total += N.dims[i] * M.dims[i]
    rows = []
    for i in range(n - 1):
        # phi_{i+1} f^M_i - f^N_i phi_i = 0  entrywise
        for r in range(N.dims[i + 1]):
            for c in range(M.dims[i]):
                row = [0] * total
                for k in range(M.dims[i + 1]):
                    row[offs[i + 1] + r * M.dims[i + 1] + k] += M.maps[i][k][c]
                for k in range(N.dims[i]):
                    row[offs[i] + k * M.dims[i] + c] -= N.maps[i][r][k]
                rows.append(tuple(x % p for x in row))
    if total == 0:
        return []
    if not rows:
        basis = gfp.identity(total, p)
    else:
        basis = gfp.kernel_basis(tuple(rows), p)
    out = []
    for v in basis:
        phis = []
        for i in range(n):
            mat = tuple(tuple(v[offs[i] + r * M.dims[i] + c]
                              for c in range(M.dims[i]))
                        for r in range(N.dims[i]))
            phis.append(mat)
        out.append(tuple(phis))
    return out


def an_hom_dim(M, N):
    return len(an_hom_basis(M, N))


def an_euler_form(M, N):
    """<M, N> = sum dims - sum over arrows; dim Hom - dim Ext^1."""
    s = sum(m * nn for m, nn in zip(M.dims, N.dims))
    for i in range(M.n - 1):
        s -= M.dims[i] * N.dims[i + 1]
    return s


def an_ext_dim(M, N):
    return an_hom_dim(M, N) - an_euler_form(M, N)


def an_ext1_cocycles(C: "AnRep", A: "AnRep"):
    """Coset representatives of Ext^1(C, A) in the triangular cocycle model:
    psi = (psi_i: C_i -> A_{i+1}), modulo coboundaries
    psi_i = f^A_i h_i - h_{i+1} f^C_i."""
    n, p = C.n, C.p
    total = sum(A.dims[i + 1] * C.dims[i] for i in range(n - 1))
    if total == 0:
        return [_zero_cocycle(C, A)]

    def flat(psi):
        v = []
        for i in range(n - 1):
            for row in psi[i]:
                v.extend(row)
        return tuple(x % p for x in v)

    img_rows = []
    for i in range(n):
        for r in range(A.dims[i]):
            for c in range(C.dims[i]):
                psi = [[[0] * C.dims[j] for _ in range(A.dims[j + 1])]
                       for j in range(n - 1)]
                if i <= n - 2:
                    for rr in range(A.dims[i + 1]):
                        psi[i][rr][c] = (psi[i][rr][c] + A.maps[i][rr][r]) % p
                if i >= 1:
                    for cc in range(C.dims[i - 1]):
                        psi[i - 1][r][cc] = (psi[i - 1][r][cc]
                                             - C.maps[i - 1][c][cc]) % p
                img_rows.append(flat(psi))
    basis_rows = [tuple(1 if t == s else 0 for t in range(total))
                  for s in range(total)]
    reps = _complement_reps(basis_rows, img_rows, p)
    out = []
    for v in reps:
        psi = []
        k = 0
        for i in range(n - 1):
            m = []
            for r in range(A.dims[i + 1]):
                m.append(tuple(v[k:k + C.dims[i]]))
                k += C.dims[i]
            psi.append(tuple(m))
        out.append(tuple(psi))
    return out


def _zero_cocycle(C, A):
    return tuple(tuple((0,) * C.dims[i] for _ in range(A.dims[i + 1]))
                 for i in range(C.n - 1))


# projective resolution: P(interval [a,b]) : 0 -> P_{b+1} -> P_a -> [a,b] -> 0
# with P_i = [i, n]; for direct sums take sums of resolutions.


def an_resolution(C: AnRep, intervals):
    """(P0, P1, iota: P1 -> P0) with coker(iota) = C (C = sum of intervals)."""
    n, p = C.n, C.p
    p0_list = [(a, n) for a, b in intervals]
    p1_list = [(b + 1, n) for a, b in intervals if b + 1 <= n]
    P0 = rep_of_multiset(n, p, p0_list)
    P1 = rep_of_multiset(n, p, p1_list)
    # iota: block map sending the [b+1, n]-summand identically into [a, n]
    # vertex-wise; build vertex matrices
    iota = []
    for i in range(n):
        rows = P0.dims[i]
        cols = P1.dims[i]
        m = [[0] * cols for _ in range(rows)]
        # row offsets per P0 summand / col offsets per P1 summand
        roff = 0
        r_offsets = []
        for (a, b) in p0_list:
            r_offsets.append(roff)
            roff += 1 if a <= i + 1 <= n else 0
        coff = 0
        c_offsets = []
        for (a2, b2) in p1_list:
            c_offsets.append(coff)
            coff += 1 if a2 <= i + 1 <= n else 0
        # match the k-th interval with b+1<=n to its P1 summand in order
        k1 = 0
        for k0, (a, b) in enumerate(intervals):
            if b + 1 > n:
                continue
            if b + 1 <= i + 1 <= n and a <= i + 1 <= n:
                m[r_offsets[k0]][c_offsets[k1]] = 1
            k1 += 1
        iota.append(tuple(tuple(r) for r in m))
    return P0, P1, tuple(iota)


def an_ext1_classes(C: AnRep, intervals, A: AnRep):
    """Coset representatives of Ext^1(C, A) (list of maps P1 -> A), plus the
    resolution data for cone construction."""
    n, p = C.n, C.p
    P0, P1, iota = an_resolution(C, intervals)
    h0 = an_hom_basis(P0, A)
    h1 = an_hom_basis(P1, A)
    # matrix of iota^*: Hom(P0,A) -> Hom(P1,A) in these bases
    def flat(phis, dims_dom):
        v = []
        for i in range(n):
            for row in phis[i]:
                v.extend(row)
        return tuple(v)

    img_rows = []
    for phis in h0:
        comp = tuple(mat_mul(phis[i], iota[i], p) if phis[i] and iota[i]
                     else tuple(() for _ in range(A.dims[i]))
                     for i in range(n))
        comp = tuple(_fix_shape(comp[i], A.dims[i], P1.dims[i]) for i in range(n))
        img_rows.append(flat(comp, P1.dims))
    basis_rows = [flat(phis, P1.dims) for phis in h1]
    # complement of span(img_rows) inside span(basis_rows)
    reps = _complement_reps(basis_rows, img_rows, p)
    out = []
    for v in reps:
        phis = _unflatten(v, A.dims, P1.dims, n)
        out.append(phis)
    return out, (P0, P1, iota)


def _fix_shape(m, r, c):
    if r == 0:
        return ()
    if c == 0:
        return tuple(() for _ in range(r))
    return m


def _complement_reps(basis_rows, img_rows, p):
    """All vectors of a complement of span(img) in span(basis): one per coset."""
    if not basis_rows:
        return [()] if not img_rows else [tuple()]
    dimall = len(basis_rows[0])
    red_img, piv_img = rref(tuple(img_rows), p) if img_rows else ((), [])
    chosen = []
    cur = [r for r in red_img if any(r)]
    cur_piv = set(piv_img)
    for v in basis_rows:
        test = cur + [v]
        if rank(tuple(test), p) > len(cur):
            chosen.append(v)
            cur = [r for r in rref(tuple(test), p)[0] if any(r)]
    # all linear combinations of chosen vectors
    reps = []
    for coeffs in product(range(p), repeat=len(chosen)):
        v = [0] * dimall
        for c, w in zip(coeffs, chosen):
            if c:
                v = [(x + c * y) % p for x, y in zip(v, w)]
        reps.append(tuple(v))
    return reps


def _unflatten(v, adims, bdims, n):
    phis = []
    k = 0
    for i in range(n):
        m = []
        for r in range(adims[i]):
            m.append(tuple(v[k:k + bdims[i]]))
            k += bdims[i]
        phis.append(tuple(m))
    return tuple(phis)


def _coker_proj(img_cols, dim, p):
    """Projection matrix onto a cokernel of the span of given columns."""
    if dim == 0:
        return (), 0
    rows = [tuple(c) for c in img_cols if any(c)]
    if not rows:
        return gfp.identity(dim, p), dim
    red, piv = rref(tuple(rows), p)
    piv = list(piv)
    free = [c for c in range(dim) if c not in piv]
    # class of e_j: unit vector if j free; pivot row r gives -red[r][free]
    out = []
    for k, fcol in enumerate(free):
        row = [0] * dim
        for j in range(dim):
            if j == fcol:
                row[j] = 1
            elif j in piv:
                r = piv.index(j)
                row[j] = (-red[r][fcol]) % p
        out.append(tuple(row))
    return tuple(out), len(free)


def _section(proj, p):
    """Right inverse of a full-rank projection matrix."""
    if not proj:
        return ()
    rows = len(proj)
    cols = len(proj[0])
    # solve proj * S = I
    red, piv = rref(proj, p)
    s = [[0] * rows for _ in range(cols)]
    aug = [list(r) + [1 if i == j else 0 for j in range(rows)]
           for i, r in enumerate(proj)]
    red2, piv2 = rref(tuple(tuple(r) for r in aug), p)
    for r, c in enumerate(piv2):
        if c < cols:
            for j in range(rows):
                s[c][j] = red2[r][cols + j]
    return tuple(tuple(r) for r in s)


# ---------------------------------------------------------------------------
# Laurent modules


def laurent_hom_basis(Mx, Nx, p):
    """Basis of {phi: phi Mx = Nx phi} (matrices dim(N) x dim(M))."""
    dm, dn = len(Mx), len(Nx)
    total = dm * dn
    if total == 0:
        return []
    rows = []
    for r in range(dn):
        for c in range(dm):
            row = [0] * total
            for k in range(dm):
                row[r * dm + k] += Mx[k][c]
            for k in range(dn):
                row[k * dm + c] -= Nx[r][k]
            rows.append(tuple(x % p for x in row))
    basis = gfp.kernel_basis(tuple(rows), p)
    return [tuple(tuple(v[r * dm + c] for c in range(dm)) for r in range(dn))
            for v in basis]


def laurent_ext1_classes(Cx, Ax, p):
    """Coset reps of Ext^1(C, A) = Hom_K / {x_A h - h x_C}."""
    dc, da = len(Cx), len(Ax)
    total = da * dc
    if total == 0:
        return [()]
    img = []
    for r in range(da):
        for c in range(dc):
            h = [[0] * dc for _ in range(da)]
            h[r][c] = 1
            d = [[0] * dc for _ in range(da)]
            for i in range(da):
                for j in range(dc):
                    v = 0
                    for k in range(da):
                        v += Ax[i][k] * h[k][j]
                    for k in range(dc):
                        v -= h[i][k] * Cx[k][j]
                    d[i][j] = v % p
            img.append(tuple(x for row in d for x in row))
    basis = [tuple(1 if t == s else 0 for t in range(total)) for s in range(total)]
    reps = _complement_reps(basis, img, p)
    return [tuple(tuple(v[i * dc + j] for j in range(dc)) for i in range(da))
            for v in reps]


def laurent_middle(Cx, Ax, psi, p):
    """x-matrix of the extension with cocycle psi: [[Ax, psi], [0, Cx]]."""
    da, dc = len(Ax), len(Cx)
    out = []
    for i in range(da):
        out.append(tuple(Ax[i]) + tuple(psi[i] if psi else (0,) * dc))
    for i in range(dc):
        out.append((0,) * da + tuple(Cx[i]))
    return tuple(out)


def laurent_ext_dim(Cx, Ax, p):
    return len(laurent_hom_basis(Cx, Ax, p))  # Euler form 0: dim Ext^1 = dim Hom


# ---------------------------------------------------------------------------
# objects and Hall elements


def an_key(pieces):
    """pieces: iterable of (a, b, shift)."""
    return tuple(sorted(pieces))


def laurent_key(layers):
    """layers: iterable of (shift, ModuleClass); at most one class per shift."""
    out = tuple(sorted(layers, key=lambda t: t[0]))
    shifts = [s for s, _ in out]
    assert len(set(shifts)) == len(shifts)
    return out


@dataclass
class HallElem:
    ctx: object
    terms: dict  # key -> Fraction

    def __add__(self, other):
        assert self.ctx == other.ctx
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
            if out[k] == 0:
                del out[k]
        return HallElem(self.ctx, out)

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return HallElem(self.ctx, {})
        return HallElem(self.ctx, {k: v * c for k, v in self.terms.items()})

    def __eq__(self, other):
        return self.ctx == other.ctx and self.terms == other.terms

    def mass(self):
        return sum(self.terms.values(), Fraction(0))

    def to_json(self):
        return {"terms": [{"object": _key_json(k), "coeff": str(v)}
                          for k, v in sorted(self.terms.items(), key=str)]}


def _key_json(key):
    out = []
    for piece in key:
        if isinstance(piece[1], ModuleClass):
            out.append({"shift": piece[0],
                        "factors": [list(f) for f in piece[1].invariant_factors]})
        else:
            out.append({"interval": [piece[0], piece[1]], "shift": piece[2]})
    return out


def unit(ctx):
    return HallElem(ctx, {(): Fraction(1)})


def basis_elem(ctx, key, coeff=1):
    return HallElem(ctx, {key: Fraction(coeff)})


# -- layered access ---------------------------------------------------------


def _an_layers(key):
    layers = {}
    for a, b, s in key:
        layers.setdefault(s, []).append((a, b))
    return layers


def _laurent_layers(key):
    return {s: mc for s, mc in key}


def hom_ext_dims(ctx, X, Y):
    """dims of Ext^k(X, Y) per derived degree k (nonzero entries only)."""
    out = {}
    if ctx.kind() == "an":
        lx, ly = _an_layers(X), _an_layers(Y)
        for sx, ix in lx.items():
            Mx = rep_of_multiset(ctx.n, ctx.p, ix)
            for sy, iy in ly.items():
                My = rep_of_multiset(ctx.n, ctx.p, iy)
                # Ext^k(M[sx], N[sy]) = Ext^{k+sy-sx}_ab(M,N)
                h = an_hom_dim(Mx, My)
                e = an_ext_dim(Mx, My)
                if h:
                    out[sx - sy] = out.get(sx - sy, 0) + h
                if e:
                    out[sx - sy + 1] = out.get(sx - sy + 1, 0) + e
    else:
        lx, ly = _laurent_layers(X), _laurent_layers(Y)
        for sx, mx in lx.items():
            for sy, my in ly.items():
                h = len(laurent_hom_basis(mx.matrix(), my.matrix(), ctx.p))
                if h:
                    out[sx - sy] = out.get(sx - sy, 0) + h
                    out[sx - sy + 1] = out.get(sx - sy + 1, 0) + h
    return {k: v for k, v in out.items() if v}


def ext_dim_k(ctx, X, Y, k):
    return hom_ext_dims(ctx, X, Y).get(k, 0)


# ---------------------------------------------------------------------------
# the product


def hall_product(a: HallElem, b: HallElem, budget=200000) -> HallElem:
    assert a.ctx == b.ctx
    ctx = a.ctx
    out = HallElem(ctx, {})
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            pp = _product_pair(ctx, ka, kb, budget)
            out = out + pp.scale(ca * cb)
    return out


def _pure_shift(ctx, key):
    if ctx.kind() == "an":
        shifts = {s for _, _, s in key}
    else:
        shifts = {s for s, _ in key}
    if len(shifts) > 1:
        raise HallError("product requires the right factor in a single shift")
    return shifts.pop() if shifts else None


def _product_pair(ctx, ka, kb, budget):
    if not kb:
        return basis_elem(ctx, ka)
    if not ka:
        return basis_elem(ctx, kb)
    sc = _pure_shift(ctx, kb)
    p = ctx.p
    # prefactor over Ext^{-i}(C, A), i >= 0
    pref = Fraction(1)
    dims = hom_ext_dims(ctx, kb, ka)
    for k, d in dims.items():
        if k <= 0:
            i = -k
            pref *= Fraction(p) ** (d if (i + 1) % 2 == 0 else -d)
    if ctx.kind() == "an":
        return _an_product(ctx, ka, kb, sc, pref, budget)
    return _laurent_product(ctx, ka, kb, sc, pref, budget)


def _an_product(ctx, ka, kb, sc, pref, budget):
    n, p = ctx.n, ctx.p
    layers = _an_layers(ka)
    C_int = tuple(sorted((a, b) for a, b, _ in kb))
    C = rep_of_multiset(n, p, C_int)
    A_same = rep_of_multiset(n, p, layers.get(sc, []))
    A_adj = rep_of_multiset(n, p, layers.get(sc - 1, []))
    rest = [(a, b, s) for a, b, s in ka if s not in (sc, sc - 1)]
    ext_classes = an_ext1_cocycles(C, A_same)
    homs = an_hom_basis(C, A_adj)
    total = len(ext_classes) * (p ** len(homs))
    if total > budget:
        raise BudgetExceeded(f"{total} cone terms exceed budget")
    out = {}
    for psi in ext_classes:
        for coeffs in product(range(p), repeat=len(homs)):
            fhom = _lin_comb(homs, coeffs, C.dims, A_adj.dims, n, p)
            key = _an_cone_key(ctx, C, A_same, A_adj, rest, sc, psi, fhom)
            out[key] = out.get(key, Fraction(0)) + 1
    return HallElem(ctx, out).scale(pref)


def _lin_comb(basis, coeffs, cdims, adims, n, p):
    phis = []
    for i in range(n):
        m = [[0] * cdims[i] for _ in range(adims[i])]
        for c, phi in zip(coeffs, basis):
            if not c:
                continue
            for r in range(adims[i]):
                for k in range(cdims[i]):
                    m[r][k] = (m[r][k] + c * phi[i][r][k]) % p
        phis.append(tuple(tuple(r) for r in m))
    return tuple(phis)


def _an_cone_key(ctx, C, A_same, A_adj, rest, sc, psi, fhom):
    n, p = ctx.n, ctx.p
    # kernel of fhom: C -> A_adj as a subrepresentation
    kdims, kincl = [], []
    for i in range(n):
        if C.dims[i] == 0:
            kdims.append(0)
            kincl.append(())
            continue
        if A_adj.dims[i] == 0 or not fhom[i]:
            kdims.append(C.dims[i])
            kincl.append(gfp.identity(C.dims[i], p))
            continue
        kb = gfp.kernel_basis(fhom[i], p)
        kdims.append(len(kb))
        kincl.append(tuple(tuple(v[c] for v in kb) for c in range(C.dims[i]))
                     if kb else _fix_shape((), C.dims[i], 0))
    ker_maps = []
    for i in range(n - 1):
        if kdims[i] and kdims[i + 1]:
            big = mat_mul(C.maps[i], kincl[i], p)
            ker_maps.append(_solve_cols(kincl[i + 1], big, p))
        else:
            ker_maps.append(_fix_shape((), kdims[i + 1], kdims[i]))
    K = AnRep(n, p, tuple(kdims), tuple(ker_maps))
    # cokernel of fhom with induced maps
    cdims, cproj = [], []
    for i in range(n):
        cols = [tuple(fhom[i][r][c] for r in range(A_adj.dims[i]))
                for c in range(C.dims[i])] if A_adj.dims[i] and C.dims[i] else []
        proj, d = _coker_proj(cols, A_adj.dims[i], p)
        cdims.append(d)
        cproj.append(proj)
    cok_maps = []
    for i in range(n - 1):
        if cdims[i] and cdims[i + 1]:
            sec = _section(cproj[i], p)
            cok_maps.append(mat_mul(cproj[i + 1],
                                    mat_mul(A_adj.maps[i], sec, p), p))
        else:
            cok_maps.append(_fix_shape((), cdims[i + 1], cdims[i]))
    Cok = AnRep(n, p, tuple(cdims), tuple(cok_maps))
    # extension class psi pulled back to the kernel
    psiK = []
    for i in range(n - 1):
        if A_same.dims[i + 1] and kdims[i]:
            psiK.append(mat_mul(psi[i], kincl[i], p))
        else:
            psiK.append(_fix_shape((), A_same.dims[i + 1], kdims[i]))
    EK = _an_middle_from_cocycle(A_same, K, tuple(psiK), p)
    pieces = list(rest)
    pieces.extend((a, b, sc - 1) for a, b in Cok.decompose())
    pieces.extend((a, b, sc) for a, b in EK.decompose())
    return an_key(pieces)


def _solve_cols(basis_cols, target, p):
    """Express target columns in terms of basis columns: returns the
    coefficient matrix X with basis_cols * X = target."""
    rows = len(basis_cols)
    bc = len(basis_cols[0]) if rows else 0
    tc = len(target[0]) if target else 0
    out_cols = []
    for c in range(tc):
        b = tuple(target[r][c] for r in range(rows))
        sol = gfp.solve(basis_cols, b, p)
        assert sol is not None
        out_cols.append(sol)
    return tuple(tuple(out_cols[c][r] for c in range(tc))
                 for r in range(bc))


def _complement_basis(cols, dim, p):
    """Vectors completing the span of the given columns to F_p^dim."""
    cur = [tuple(c) for c in cols if any(c)]
    out = []
    for j in range(dim):
        e = tuple(1 if t == j else 0 for t in range(dim))
        r0 = rank(tuple(cur), p) if cur else 0
        if rank(tuple(cur + [e]), p) > r0:
            cur.append(e)
            out.append(e)
    return out


def _an_middle_from_cocycle(A, C, psi, p):
    """Triangular middle: dims A_i + C_i, maps [[fA, psi], [0, fC]]."""
    n = A.n
    dims = tuple(a + c for a, c in zip(A.dims, C.dims))
    maps = []
    for i in range(n - 1):
        ra, ca = A.dims[i + 1], A.dims[i]
        rc, cc = C.dims[i + 1], C.dims[i]
        m = [[0] * (ca + cc) for _ in range(ra + rc)]
        for r in range(ra):
            for c in range(ca):
                m[r][c] = A.maps[i][r][c]
            for c in range(cc):
                m[r][ca + c] = psi[i][r][c] if psi[i] else 0
        for r in range(rc):
            for c in range(cc):
                m[ra + r][ca + c] = C.maps[i][r][c]
        maps.append(tuple(tuple(r) for r in m))
    return AnRep(n, p, dims, tuple(maps))


def _laurent_product(ctx, ka, kb, sc, pref, budget):
    p = ctx.p
    layers = _laurent_layers(ka)
    Cmc = _laurent_layers(kb)[sc]
    Cx = Cmc.matrix()
    Ax = layers.get(sc).matrix() if sc in layers else ()
    Adjx = layers.get(sc - 1).matrix() if sc - 1 in layers else ()
    rest = [(s, mc) for s, mc in ka if s not in (sc, sc - 1)]
    ext_classes = laurent_ext1_classes(Cx, Ax, p) if Ax else [()]
    homs = laurent_hom_basis(Cx, Adjx, p) if Adjx else []
    total = len(ext_classes) * (p ** len(homs))
    if total > budget:
        raise BudgetExceeded(f"{total} cone terms exceed budget")
    out = {}
    dc = len(Cx)
    for psi in ext_classes:
        for coeffs in product(range(p), repeat=len(homs)):
            if homs:
                f = [[0] * dc for _ in range(len(Adjx))]
                for c, h in zip(coeffs, homs):
                    if c:
                        for r in range(len(Adjx)):
                            for k in range(dc):
                                f[r][k] = (f[r][k] + c * h[r][k]) % p
                fhom = tuple(tuple(r) for r in f)
            else:
                fhom = ()
            key = _laurent_cone_key(ctx, Cx, Ax, Adjx, rest, sc, psi, fhom)
            out[key] = out.get(key, Fraction(0)) + 1
    return HallElem(ctx, out).scale(pref)


def _laurent_cone_key(ctx, Cx, Ax, Adjx, rest, sc, psi, fhom):
    p = ctx.p
    # kernel of fhom as a module
    if fhom and Adjx:
        kb = gfp.kernel_basis(fhom, p)
    else:
        kb = gfp.identity(len(Cx), p) if Cx else ()
    kb = tuple(kb)
    layers = list(rest)
    if kb:
        incl = tuple(tuple(v[c] for v in kb) for c in range(len(Cx)))
        big = mat_mul(Cx, incl, p)
        Kx = _solve_cols(incl, big, p)
        # middle: extension of K by A with cocycle psi restricted to K
        if Ax:
            psiK = mat_mul(psi, incl, p) if psi else ()
            Ex = laurent_middle(Kx, Ax, psiK, p)
        else:
            Ex = Kx
    else:
        Ex = Ax
    if Ex:
        layers.append((sc, invariant_factors(Ex, p)))
    # cokernel of fhom
    if Adjx:
        if fhom:
            cols = [tuple(fhom[r][c] for r in range(len(Adjx)))
                    for c in range(len(Cx))]
            proj, d = _coker_proj(cols, len(Adjx), p)
            if d:
                sec = _section(proj, p)
                Cokx = mat_mul(proj, mat_mul(Adjx, sec, p), p)
                layers.append((sc - 1, invariant_factors(Cokx, p)))
        else:
            layers.append((sc - 1, invariant_factors(Adjx, p)))
    return laurent_key(layers)


# ---------------------------------------------------------------------------
# classical Hall numbers


def jordan_matrix(partition, p):
    """Unipotent matrix of Jordan type = partition (eigenvalue 1)."""
    blocks = []
    for k in partition:
        m = [[0] * k for _ in range(k)]
        for i in range(k):
            m[i][i] = 1
            if i + 1 < k:
                m[i + 1][i] = 1
        blocks.append(tuple(tuple(r) for r in m))
    out = blocks[0] if blocks else ()
    for b in blocks[1:]:
        out = gfp.block_diag(out, b)
    return out


def unipotent_type(Mx, p):
    """Jordan partition of a unipotent matrix."""
    n = len(Mx)
    if n == 0:
        return ()
    N = tuple(tuple((Mx[i][j] - (1 if i == j else 0)) % p for j in range(n))
              for i in range(n))
    ranks = [n]
    pw = gfp.identity(n, p)
    for _ in range(n):
        pw = mat_mul(pw, N, p)
        ranks.append(rank(pw, p))
    counts = []
    for j in range(1, n + 1):
        counts.append(ranks[j - 1] - ranks[j])  # number of blocks of size >= j
    part = []
    for j in range(n, 0, -1):
        c = counts[j - 1] - (counts[j] if j < n else 0)
        part.extend([j] * c)
    return tuple(sorted((x for x in part if x), reverse=True))


def all_subspaces(dim, p):
    """All subspaces of F_p^dim as row-reduced bases."""
    out = [()]
    # enumerate RREFs by choosing pivot columns and free entries
    from itertools import combinations
    for k in range(1, dim + 1):
        for piv in combinations(range(dim), k):
            free_positions = []
            for r, pc in enumerate(piv):
                for c in range(pc + 1, dim):
                    if c not in piv:
                        free_positions.append((r, c))
            for vals in product(range(p), repeat=len(free_positions)):
                m = [[0] * dim for _ in range(k)]
                for r, pc in enumerate(piv):
                    m[r][pc] = 1
                for (r, c), v in zip(free_positions, vals):
                    m[r][c] = v
                out.append(tuple(tuple(r) for r in m))
    return out


def classical_hall_number(lam, mu, nu, p, budget=200000):
    """#{submodules N of M_lam with N of type nu and M/N of type mu}."""
    if sum(mu) + sum(nu) != sum(lam):
        raise HallError("|mu| + |nu| must equal |lambda|")
    n = sum(lam)
    if p ** n > budget:
        raise BudgetExceeded("subspace enumeration too large")
    M = jordan_matrix(tuple(lam), p)
    count = 0
    for basis in all_subspaces(n, p):
        k = len(basis)
        if k != sum(nu):
            continue
        # invariance
        incl = tuple(tuple(v[c] for v in basis) for c in range(n))
        img = mat_mul(M, incl, p) if k else ()
        if k:
            aug = tuple(basis)
            ok = all(gfp.solve(incl, tuple(img[r][c] for r in range(n)), p)
                     is not None for c in range(k))
            if not ok:
                continue
            Nx = _solve_cols(incl, img, p)
        else:
            Nx = ()
        if unipotent_type(Nx, p) != tuple(sorted(nu, reverse=True)):
            continue
        # quotient type
        proj, d = _coker_proj([tuple(b) for b in basis], n, p)
        if d:
            sec = _section(proj, p)
            Qx = mat_mul(proj, mat_mul(M, sec, p), p)
        else:
            Qx = ()
        if unipotent_type(Qx, p) != tuple(sorted(mu, reverse=True)):
            continue
        count += 1
    return count


# ---------------------------------------------------------------------------
# projections and checks


def jshriek(a: HallElem) -> HallElem:
    assert a.ctx.kind() == "laurent"
    out = {}
    for key, c in a.terms.items():
        if all(mc.is_unipotent() for _, mc in key):
            out[key] = c
    return HallElem(a.ctx, out)


def assoc_check(ctx, triples, budget=200000):
    """([A][B])[C] == [A]([B][C]) for every triple of basis keys."""
    for ka, kb, kc in triples:
        A, B, C = (basis_elem(ctx, k) for k in (ka, kb, kc))
        lhs = hall_product(hall_product(A, B, budget), C, budget)
        rhs = hall_product(A, hall_product(B, C, budget), budget)
        if lhs != rhs:
            return False, (ka, kb, kc, lhs, rhs)
    return True, None


def slicing_factorize(ctx, key):
    """Factor a basis object by shift (descending); returns (factors, c) with
    [A_1]...[A_m] = c [A_1 + ... + A_m]."""
    if ctx.kind() == "an":
        layers = _an_layers(key)
        factors = [an_key([(a, b, s) for a, b in layers[s]])
                   for s in sorted(layers, reverse=True)]
    else:
        layers = _laurent_layers(key)
        factors = [laurent_key([(s, layers[s])])
                   for s in sorted(layers, reverse=True)]
    prod = unit(ctx)
    for f in factors:
        prod = hall_product(prod, basis_elem(ctx, f))
    if set(prod.terms) != {key}:
        raise HallError(f"split filtration product is not a multiple of {key}: "
                        f"{prod.terms}")
    return factors, prod.terms[key]
