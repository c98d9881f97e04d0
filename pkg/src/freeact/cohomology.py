"""Group cohomology H^n(Ghat, M) for finite abelian Ghat with coefficients in
a permutation module M = (Z_N)^s, plus closed forms for Ghat = Z^r.

The circle group of central unitary phases is truncated to the finite group
mu_N of N-th roots of unity, carried additively as exponents.  A class of the
truncated theory is kept only if it survives into mu_{kN} for the stability
multiplier k = lcm(2, exponent(Ghat)); for trivial actions this provably
reproduces the circle-coefficient answer (the symmetric/Ext classes die, the
alternating bicharacter classes inject).  Every result records the truncation
order it was computed at, and the reported group is recomputed at doubled
truncation and compared (abort on disagreement).

All homology is integer linear algebra: cochain groups are presented as
Z^D / N*Z^D and kernels, images and quotients are Smith-normal-form lattices.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import intlin
from .errors import ComputeError, NontrivialAction, NotACocycle, UnsupportedGroup


class CoefficientModule:
    """(Z_N)^s with Ghat permuting the s coordinates: (pi.u)_i = u[perm(pi)(i)]."""

    def __init__(self, group, n, s, action=None, _skip_check=False):
        self.group = group
        self.n = int(n)
        self.s = int(s)
        if action is None:
            self._perms = None
        elif callable(action):
            if not group.is_finite():
                raise UnsupportedGroup("callable actions need a finite group")
            self._perms = {g.coords: tuple(action(g)) for g in group}
        else:
            self._perms = {k: tuple(v) for k, v in dict(action).items()}
        if not _skip_check and self._perms is not None and group.is_finite():
            self._verify_homomorphism()

    def _verify_homomorphism(self):
        idp = tuple(range(self.s))
        assert self.perm(self.group.identity()) == idp, "identity must act trivially"
        for a in self.group.generators():
            for b in self.group.generators():
                pa, pb, pab = self.perm(a), self.perm(b), self.perm(a + b)
                composed = tuple(pb[pa[i]] for i in range(self.s))
                if composed != pab:
                    raise ValueError("module action is not a homomorphism")
        for g in self.group.generators():
            d = g.order()
            if d != math.inf:
                acc = g
                for _ in range(int(d) - 1):
                    acc = acc + g
                if self.perm(acc) != idp:
                    raise ValueError("module action violates a group relation")

    def perm(self, pi):
        if self._perms is None:
            return tuple(range(self.s))
        return self._perms[pi.coords]

    def is_trivial_action(self):
        if self._perms is None:
            return True
        idp = tuple(range(self.s))
        return all(p == idp for p in self._perms.values())

    def act(self, pi, vec):
        p = self.perm(pi)
        return tuple(vec[p[i]] % self.n for i in range(self.s))

    def zero(self):
        return (0,) * self.s

    def rebase(self, new_n):
        """Same module with the root-of-unity order replaced by new_n."""
        return CoefficientModule(self.group, new_n, self.s, self._perms,
                                 _skip_check=True)

    def stable_multiplier(self):
        return math.lcm(2, self.group.exponent())

    def __eq__(self, other):
        return isinstance(other, CoefficientModule) and \
            (self.group, self.n, self.s) == (other.group, other.n, other.s) and \
            self._perms == other._perms

    def __repr__(self):
        tag = "trivial" if self.is_trivial_action() else "permutation"
        return f"CoefficientModule(mu_{self.n}^{self.s}, {tag} action of {self.group})"


class Cochain:
    """Normalized n-cochain on Ghat valued in (Z_N)^s exponents.

    Entries at tuples containing the identity are identically zero and are
    not stored.
    """

    def __init__(self, module, degree, table=None):
        self.module = module
        self.degree = int(degree)
        self.table = {}
        if table:
            for key, vec in table.items():
                key = tuple(tuple(c) for c in key)
                if any(all(c == 0 for c in t) for t in key):
                    continue
                vec = tuple(int(v) % module.n for v in vec)
                if any(vec):
                    self.table[key] = vec

    def value(self, *args):
        key = tuple(a.coords if hasattr(a, "coords") else tuple(a) for a in args)
        if len(key) != self.degree:
            raise ValueError(f"expected {self.degree} arguments")
        return self.table.get(key, self.module.zero())

    def __add__(self, other):
        assert self.degree == other.degree and self.module.n == other.module.n
        keys = set(self.table) | set(other.table)
        return Cochain(self.module, self.degree, {
            k: tuple((a + b) % self.module.n for a, b in
                     zip(self.table.get(k, self.module.zero()),
                         other.table.get(k, other.module.zero())))
            for k in keys})

    def __neg__(self):
        return Cochain(self.module, self.degree, {
            k: tuple(-a % self.module.n for a in v) for k, v in self.table.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, m):
        return Cochain(self.module, self.degree, {
            k: tuple(m * a % self.module.n for a in v) for k, v in self.table.items()})

    def rebase(self, new_n):
        """Push exponents along mu_N -> mu_N', N | N' (multiply by N'/N)."""
        if new_n % self.module.n != 0:
            raise ValueError("rebase target must be a multiple of the truncation")
        m = new_n // self.module.n
        return Cochain(self.module.rebase(new_n), self.degree, {
            k: tuple(m * a for a in v) for k, v in self.table.items()})

    def is_zero(self):
        return not self.table

    def __eq__(self, other):
        return isinstance(other, Cochain) and self.degree == other.degree and \
            self.module.n == other.module.n and self.table == other.table

    def __repr__(self):
        n = len(self.table)
        return f"Cochain(deg={self.degree}, mu_{self.module.n}^{self.module.s}, {n} entries)"


def differential(c):
    """Inhomogeneous bar differential with the twisted permutation action.

    (dc)(p1,...,p_{n+1}) = p1.c(p2,...) + sum_j (-1)^j c(..., pj + p_{j+1}, ...)
                           + (-1)^{n+1} c(p1,...,pn)
    """
    module = c.module
    group = module.group
    n = c.degree
    elems = list(group)
    out = {}
    for args in itertools.product(elems, repeat=n + 1):
        if any(a.is_identity() for a in args):
            continue
        vec = list(module.act(args[0], c.value(*args[1:])))
        sign = -1
        for j in range(n):
            merged = args[:j] + (args[j] + args[j + 1],) + args[j + 2:]
            term = c.value(*merged)
            vec = [(a + sign * b) % module.n for a, b in zip(vec, term)]
            sign = -sign
        term = c.value(*args[:-1])
        vec = [(a + sign * b) % module.n for a, b in zip(vec, term)]
        if any(vec):
            out[tuple(a.coords for a in args)] = tuple(vec)
    return Cochain(module, n + 1, out)


# -- flattening to integer vectors -------------------------------------------


class _Complex:
    """Index bookkeeping for normalized cochain groups of one module."""

    def __init__(self, module):
        if not module.group.is_finite():
            raise UnsupportedGroup("bar complex requires a finite group")
        self.module = module
        self.nonid = [g for g in module.group if not g.is_identity()]

    def dim(self, n):
        return self.module.s * len(self.nonid) ** n

    def keys(self, n):
        return list(itertools.product(self.nonid, repeat=n))

    def flatten(self, c):
        vec = np.zeros(self.dim(c.degree), dtype=object)
        idx = 0
        for key in self.keys(c.degree):
            v = c.value(*key)
            for j in range(self.module.s):
                vec[idx] = v[j]
                idx += 1
        return vec

    def unflatten(self, vec, n, module=None):
        module = module or self.module
        table = {}
        idx = 0
        for key in self.keys(n):
            v = tuple(int(vec[idx + j]) % module.n for j in range(self.module.s))
            idx += self.module.s
            if any(v):
                table[tuple(k.coords for k in key)] = v
        return Cochain(module, n, table)

    def basis_cochain(self, n, key, coord):
        vec = [0] * self.module.s
        vec[coord] = 1
        return Cochain(self.module, n, {tuple(k.coords for k in key): vec})

    def differential_matrix(self, n):
        """Matrix of d_n : C^n -> C^{n+1} in the flattened bases.

        Entries are exact integers (signed sums of permutation actions), not
        reduced mod N, so the same matrix is valid at every truncation.
        """
        rows, cols = self.dim(n + 1), self.dim(n)
        s = self.module.s
        col_index = {key: i for i, key in enumerate(self.keys(n))}
        mat = np.zeros((rows, cols), dtype=object)
        row = 0
        for args in self.keys(n + 1):
            perm = self.module.perm(args[0])
            tail = args[1:]
            for i in range(s):
                # first term: args[0] acting on c(args[1:])
                mat[row + i, s * col_index[tail] + perm[i]] += 1
            sign = -1
            for j in range(n):
                merged = args[:j] + (args[j] + args[j + 1],) + args[j + 2:]
                if not any(a.is_identity() for a in merged):
                    base = s * col_index[merged]
                    for i in range(s):
                        mat[row + i, base + i] += sign
                sign = -sign
            head = args[:-1]
            base = s * col_index[head]
            for i in range(s):
                mat[row + i, base + i] += sign
            row += s
        return mat


@dataclass
class CohomologyResult:
    """H^n as an abelian group with representative cocycles.

    invariant_factors describe the stable (circle-coefficient) group; the
    representatives are cocycles at the recorded truncation.  torus_rank is
    set for the closed-form Z^r cases and None for finite groups.
    """

    degree: int
    invariant_factors: list
    representatives: list
    truncation: int
    stable_multiplier: int
    raw_invariant_factors: list
    torus_rank: int = None
    solver: object = None

    def order(self):
        if self.torus_rank:
            return math.inf
        return math.prod(self.invariant_factors) if self.invariant_factors else 1

    def all_classes(self, limit=4096):
        """(coords, representative) for every class of the stable group."""
        if self.torus_rank:
            raise UnsupportedGroup("cannot enumerate a torus of classes")
        if self.order() > limit:
            raise ComputeError(f"refusing to enumerate {self.order()} classes")
        out = []
        for coords in itertools.product(*(range(e) for e in self.invariant_factors)):
            rep = Cochain(self.solver.module, self.degree)
            for c, r in zip(coords, self.representatives):
                rep = rep + r.scale(c)
            out.append((coords, rep))
        return out

    def describe(self):
        if self.torus_rank is not None:
            return f"torus of dimension {self.torus_rank}"
        if not self.invariant_factors:
            return "trivial"
        return " x ".join(f"Z{e}" for e in self.invariant_factors)


_solver_cache = {}


def get_solver(module, degree):
    """Cached CohomologySolver; the differential matrices are reusable."""
    key = None
    if module.group.is_finite():
        perms = tuple(sorted(module._perms.items())) if module._perms else None
        key = (module.group.invariant_factors, module.n, module.s, perms, degree)
    if key is not None and key in _solver_cache:
        return _solver_cache[key]
    solver = CohomologySolver(module, degree)
    if key is not None:
        _solver_cache[key] = solver
    return solver


class CohomologySolver:
    """Coboundary and membership queries for one (module, degree).

    The kernel/image lattices are computed lazily: plain coboundary solves
    only need the lower differential.
    """

    def __init__(self, module, degree):
        self.module = module
        self.degree = degree
        self.complex = _Complex(module)
        self._d_n = self.complex.differential_matrix(degree)
        self._d_prev = self.complex.differential_matrix(degree - 1) if degree >= 1 \
            else np.zeros((self.complex.dim(degree), 0), dtype=object)
        self._kernel_lattice = None
        self._image_lattice = None
        self._quotients = {}

    @property
    def _kernel(self):
        if self._kernel_lattice is None:
            self._kernel_lattice = intlin.kernel_mod(self._d_n, self.module.n)
        return self._kernel_lattice

    @property
    def _image(self):
        if self._image_lattice is None:
            n = self.module.n
            self._image_lattice = intlin.lattice_basis(np.concatenate(
                [self._d_prev, n * intlin.identity(self.complex.dim(self.degree))],
                axis=1))
        return self._image_lattice

    def is_cocycle(self, c):
        return differential(c).is_zero()

    def is_coboundary(self, c, truncation=None):
        """A primitive h with dh = c at the given truncation, or None.

        With truncation = m*N the cochain is first pushed along
        mu_N -> mu_{mN}; the witness then has exponents mod m*N.
        """
        if not self.is_cocycle(c):
            raise NotACocycle("is_coboundary needs dc = 0")
        n_target = truncation or self.module.n
        if n_target % self.module.n != 0:
            raise ValueError("truncation must be a multiple of the cochain's")
        mult = n_target // self.module.n
        w = self.complex.flatten(c) * mult
        sol = intlin.solve_mod(self._d_prev, w, n_target)
        if sol is None:
            return None
        target_module = self.module.rebase(n_target)
        return self.complex.unflatten(sol, self.degree - 1, target_module)

    def is_coboundary_stable(self, c):
        """Coboundary test over the circle: witness at k*N truncation."""
        k = self.module.stable_multiplier()
        return self.is_coboundary(c, truncation=k * self.module.n)

    def stable_quotient(self, k=None):
        """Lattice quotient presenting the stable H^n at multiplier k."""
        k = k or self.module.stable_multiplier()
        if k in self._quotients:
            return self._quotients[k]
        n = self.module.n
        dim = self.complex.dim(self.degree)
        if k == 1:
            killed = self._image
        else:
            image_kn = intlin.lattice_basis(np.concatenate(
                [self._d_prev, (k * n) * intlin.identity(dim)], axis=1))
            # X = {x : k*x in image at kN}: the classes that die in mu_{kN}.
            stacked = np.concatenate([k * intlin.identity(dim), -image_kn], axis=1)
            ker = intlin.kernel(stacked)
            dying = intlin.lattice_basis(ker[:dim, :])
            killed = intlin.lattice_basis(np.concatenate(
                [intlin.lattice_intersection(dying, self._kernel), self._image],
                axis=1))
        q = intlin.lattice_quotient(self._kernel, killed)
        self._quotients[k] = q
        return q

    def raw_quotient(self):
        return self.stable_quotient(k=1)

    def class_coordinates(self, c, stable=True):
        """Coordinates of [c] in the (stable) invariant-factor basis."""
        q = self.stable_quotient() if stable else self.raw_quotient()
        coords = q.coords(self.complex.flatten(c))
        if coords is None:
            raise NotACocycle("cochain is not a cocycle at this truncation")
        return coords

    def class_order(self, c, stable=True):
        coords = self.class_coordinates(c, stable=stable)
        q = self.stable_quotient() if stable else self.raw_quotient()
        return math.lcm(*(e // math.gcd(x, e) for x, e in zip(coords, q.factors)), 1)


def _closed_form(group, coeff_s, degree, trivial_action):
    """H^n for Z^r: a torus, of dimension s*binom(r, n) in the trivial case."""
    r = group.rank
    if r == 1:
        # cohomological dimension 1: trivial in degrees >= 2 for any action
        return CohomologyResult(degree, [], [], 0, 1, [], torus_rank=0)
    if not trivial_action:
        raise UnsupportedGroup("Z^r with nontrivial action is out of scope for r >= 2")
    rank = coeff_s * math.comb(r, degree)
    return CohomologyResult(degree, [], [], 0, 1, [], torus_rank=rank)


def cohomology(group, coeff, degree, check_stabilization=True):
    """H^degree(Ghat, coefficients) with representatives and a solver handle.

    Finite groups run through the Smith-normal-form machinery at the module's
    truncation; Ghat = Z (any action) and Ghat = Z^r (trivial action) use the
    closed forms.  Mixed infinite/finite factor lists are rejected.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    free = [d for d in group.invariant_factors if d == 0]
    torsion = [d for d in group.invariant_factors if d > 0]
    if free and torsion:
        raise UnsupportedGroup("mixed free/torsion groups are not supported")
    if free:
        if degree < 2:
            raise UnsupportedGroup("closed forms only cover degrees >= 2")
        if hasattr(coeff, "is_trivial_action"):
            trivial, s = coeff.is_trivial_action(), coeff.s
        else:
            trivial, s = True, int(coeff)
        return _closed_form(group, s, degree, trivial)

    solver = get_solver(coeff, degree)
    k = coeff.stable_multiplier()
    q = solver.stable_quotient(k)
    raw = solver.raw_quotient()
    reps = [solver.complex.unflatten(g, degree) for g in q.gens]
    result = CohomologyResult(
        degree=degree,
        invariant_factors=list(q.factors),
        representatives=reps,
        truncation=coeff.n,
        stable_multiplier=k,
        raw_invariant_factors=list(raw.factors),
        torus_rank=None,
        solver=solver,
    )
    if check_stabilization:
        _check_stabilization(result, coeff, degree, k)
    return result


def _check_stabilization(result, coeff, degree, k):
    """Recompute the stable group at doubled truncation and compare."""
    doubled = coeff.rebase(2 * coeff.n)
    solver2 = get_solver(doubled, degree)
    q2 = solver2.stable_quotient(k)
    if list(q2.factors) != result.invariant_factors:
        raise ComputeError(
            f"H^{degree} failed to stabilize: {result.invariant_factors} at "
            f"truncation {coeff.n} vs {list(q2.factors)} at {2 * coeff.n}")
    for e, rep in zip(result.invariant_factors, result.representatives):
        pushed = rep.rebase(2 * coeff.n)
        if solver2.class_order(pushed) != e:
            raise ComputeError(
                f"H^{degree} representative changed order under the natural map "
                f"mu_{coeff.n} -> mu_{2 * coeff.n}")


# -- the abelian/alternating splitting of H^2 ---------------------------------


class AltBicharacter:
    """Alternating biadditive form on Ghat, stored on generator pairs."""

    def __init__(self, module, values):
        self.module = module
        self.values = {tuple(k): tuple(int(x) % module.n for x in v)
                       for k, v in values.items()}

    def __call__(self, pi, rho):
        rank = self.module.group.rank
        out = [0] * self.module.s
        for i in range(rank):
            for j in range(i + 1, rank):
                beta = self.values.get((i, j), self.module.zero())
                c = pi.coords[i] * rho.coords[j] - pi.coords[j] * rho.coords[i]
                out = [(a + c * b) % self.module.n for a, b in zip(out, beta)]
        return tuple(out)

    def is_zero(self):
        return all(not any(v) for v in self.values.values())

    def __eq__(self, other):
        keys = set(self.values) | set(other.values)
        z = self.module.zero()
        return all(self.values.get(k, z) == other.values.get(k, z) for k in keys)


class SplitH2:
    """The split exact sequence 0 -> H^2_ab -> H^2 -> Alt^2 -> 0.

    lam antisymmetrizes, the section turns an alternating form into the
    upper-triangular bicharacter cocycle for the listed generator ordering,
    and pr_ab(c) = c - section(lam(c)) lands in the symmetric classes.
    """

    def __init__(self, group, module):
        if not module.is_trivial_action():
            raise NontrivialAction("the H^2 splitting needs a trivial action")
        if not group.is_finite():
            raise UnsupportedGroup("splitting implemented for finite groups")
        self.group = group
        self.module = module

    def lam(self, c):
        """Antisymmetrization as an alternating bicharacter; checks biadditivity."""
        gens = self.group.generators()
        values = {}
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                v = tuple((a - b) % self.module.n for a, b in
                          zip(c.value(gens[i], gens[j]), c.value(gens[j], gens[i])))
                values[(i, j)] = v
        form = AltBicharacter(self.module, values)
        for pi in self.group:
            for rho in self.group:
                direct = tuple((a - b) % self.module.n for a, b in
                               zip(c.value(pi, rho), c.value(rho, pi)))
                if direct != form(pi, rho):
                    raise NotACocycle("antisymmetrization is not biadditive; "
                                      "input was not a 2-cocycle")
        return form

    def section(self, form):
        """Upper-triangular bicharacter cocycle with lam(section(form)) = form."""
        rank = self.group.rank
        table = {}
        for pi in self.group:
            for rho in self.group:
                out = [0] * self.module.s
                for i in range(rank):
                    for j in range(i + 1, rank):
                        beta = form.values.get((i, j), self.module.zero())
                        cval = pi.coords[i] * rho.coords[j]
                        out = [(a + cval * b) % self.module.n
                               for a, b in zip(out, beta)]
                if any(out):
                    table[(pi.coords, rho.coords)] = tuple(out)
        return Cochain(self.module, 2, table)

    def pr_ab(self, c):
        """Symmetric-part representative of [c]."""
        return c - self.section(self.lam(c))

    def h2_ab(self):
        """Ext(Ghat, mu_N) as invariant factors: the raw symmetric classes."""
        return [math.gcd(d, self.module.n)
                for d in self.group.invariant_factors if math.gcd(d, self.module.n) > 1]
