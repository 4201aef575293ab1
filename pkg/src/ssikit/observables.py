"""Single-particle observable sets, their collective versions, and structural operators.

An :class:`ObservableSet` holds M Hermitian d-by-d operators a_k that are
orthogonal under the trace inner product, Tr(a_k a_l) = C delta_kl, together
with the tight single-particle bound K on sum_k <a_k>^2 over pure states.
:func:`collectivize` turns a set into the collective operators
A_k = sum_n a_k^(n) on N particles.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from math import factorial

import numpy as np

from .linalg import Layout, dag, embed, herm_eig, make_rng


@dataclass(frozen=True)
class ObservableSet:
    """Orthogonal Hermitian single-particle operators with a pure-state bound K."""

    local_dim: int
    ops: tuple
    ortho_const: float
    k_bound: float
    name: str

    def __len__(self):
        return len(self.ops)


@dataclass(frozen=True)
class CollectiveSet:
    """Collective operators A_k = sum_n a_k^(n) plus the local square sums sum_n (a_k^(n))^2."""

    layout: Layout
    base: ObservableSet
    collective_ops: tuple
    local_square_sums: tuple

    def __len__(self):
        return len(self.collective_ops)


def _freeze(mats):
    out = []
    for m in mats:
        m = np.asarray(m, dtype=complex)
        m.setflags(write=False)
        out.append(m)
    return tuple(out)


def spin_matrices(j) -> ObservableSet:
    """Spin-j angular momentum components (j_x, j_y, j_z).

    Condon-Shortley phases: the raising operator has real nonnegative matrix
    elements <m+1|j_+|m> = sqrt(j(j+1) - m(m+1)), and j_z is diagonal with
    entries (j, j-1, ..., -j).  C = j(j+1)(2j+1)/3; the pure-state bound is
    K = j^2.
    """
    two_j = round(2 * j)
    if two_j < 1 or abs(2 * j - two_j) > 1e-12:
        raise ValueError(f"j={j} is not a positive half-integer")
    j = two_j / 2
    d = two_j + 1
    m = j - np.arange(d)
    jz = np.diag(m.astype(complex))
    jp = np.zeros((d, d), dtype=complex)
    lower = m[1:]
    jp[np.arange(d - 1), np.arange(1, d)] = np.sqrt(j * (j + 1) - lower * (lower + 1))
    jx = (jp + dag(jp)) / 2
    jy = (jp - dag(jp)) * (-0.5 * 1j)
    c = j * (j + 1) * (2 * j + 1) / 3
    return ObservableSet(d, _freeze([jx, jy, jz]), float(c), float(j * j), f"spin:{j:g}")


def gellmann_set(d) -> ObservableSet:
    """Generalized Gell-Mann basis of the d-level traceless Hermitian operators.

    Ordering: symmetric pair operators (k<l lexicographic), then antisymmetric
    pairs, then diagonal.  Tr(g_k g_l) = 2 delta_kl, so C = 2 and K = 2(1-1/d).
    """
    if d < 2:
        raise ValueError("local dimension must be at least 2")
    ops = []
    for k, l in combinations(range(d), 2):
        g = np.zeros((d, d), dtype=complex)
        g[k, l] = 1
        g[l, k] = 1
        ops.append(g)
    for k, l in combinations(range(d), 2):
        g = np.zeros((d, d), dtype=complex)
        g[k, l] = -1j
        g[l, k] = 1j
        ops.append(g)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        ops.append(np.sqrt(2 / (l * (l + 1))) * np.diag(diag.astype(complex)))
    return ObservableSet(d, _freeze(ops), 2.0, 2.0 * (1 - 1 / d), f"gellmann:{d}")


def pairwise_loo_set(d) -> ObservableSet:
    """The d^2 pairwise local orthogonal observables, Tr(l_k l_l) = delta_kl.

    Operators (|k><l| + |l><k|)/sqrt2, i(|k><l| - |l><k|)/sqrt2 and |k><k|;
    each is measurable with a rotation in a two-level subspace followed by a
    population measurement.  C = 1 and K = 1 (sum_k <l_k>^2 equals the purity).
    """
    if d < 2:
        raise ValueError("local dimension must be at least 2")
    ops = []
    for k, l in combinations(range(d), 2):
        g = np.zeros((d, d), dtype=complex)
        g[k, l] = 1
        g[l, k] = 1
        ops.append(g / np.sqrt(2))
    for k, l in combinations(range(d), 2):
        g = np.zeros((d, d), dtype=complex)
        g[k, l] = 1j
        g[l, k] = -1j
        ops.append(g / np.sqrt(2))
    for k in range(d):
        g = np.zeros((d, d), dtype=complex)
        g[k, k] = 1
        ops.append(g)
    return ObservableSet(d, _freeze(ops), 1.0, 1.0, f"loo:{d}")


def set_by_name(name: str) -> ObservableSet:
    """Build a set from its CLI name: spin:<j>, gellmann:<d> or loo:<d>."""
    kind, _, arg = name.partition(":")
    if not arg:
        raise ValueError(f"operator set name {name!r} must look like spin:0.5 or gellmann:3")
    if kind == "spin":
        return spin_matrices(float(arg))
    if kind == "gellmann":
        return gellmann_set(int(arg))
    if kind == "loo":
        return pairwise_loo_set(int(arg))
    raise ValueError(f"unknown operator set {name!r}")


def collectivize(oset: ObservableSet, n_particles: int) -> CollectiveSet:
    """Build A_k = sum_n a_k^(n) and sum_n (a_k^(n))^2 on the full space."""
    layout = Layout(n_particles, oset.local_dim)
    collective = []
    squares = []
    for a in oset.ops:
        asq = a @ a
        collective.append(sum(embed(a, n, layout) for n in layout.sites()))
        squares.append(sum(embed(asq, n, layout) for n in layout.sites()))
    return CollectiveSet(layout, oset, _freeze(collective), _freeze(squares))


def remix(oset: ObservableSet, orthogonal=None, unitary=None, name=None) -> ObservableSet:
    """New set a'_k = sum_l O_kl (U a_l U+).

    An orthogonal remix and/or a local unitary conjugation preserves both the
    orthogonality constant C and the bound K.
    """
    ops = [np.asarray(a) for a in oset.ops]
    if unitary is not None:
        u = np.asarray(unitary)
        ops = [u @ a @ dag(u) for a in ops]
    if orthogonal is not None:
        o = np.asarray(orthogonal)
        if o.shape != (len(ops), len(ops)):
            raise ValueError("orthogonal matrix must be M x M")
        ops = [sum(o[k, l] * ops[l] for l in range(len(ops))) for k in range(len(ops))]
    return ObservableSet(
        oset.local_dim, _freeze(ops), oset.ortho_const, oset.k_bound,
        name or oset.name + "'",
    )


def gram_matrix(oset: ObservableSet):
    """Matrix of trace inner products Tr(a_k a_l)."""
    m = len(oset)
    g = np.empty((m, m))
    for k in range(m):
        for l in range(m):
            g[k, l] = np.trace(oset.ops[k] @ oset.ops[l]).real
    return g


def estimate_k(oset: ObservableSet, restarts=16, max_iters=500, tol=1e-13, seed=0):
    """Numeric estimate of K = max over pure states of sum_k <a_k>^2.

    Multi-start convex maximization: repeatedly move to the top eigenvector of
    the linearized objective 2 sum_k <a_k> a_k.  Validates the stored analytic
    bound and serves user-supplied sets.
    """
    d = oset.local_dim
    best = -np.inf
    for r in range(restarts):
        rng = make_rng(seed + r)
        psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        psi /= np.linalg.norm(psi)
        val = sum(np.vdot(psi, a @ psi).real ** 2 for a in oset.ops)
        for _ in range(max_iters):
            grad = sum(2 * np.vdot(psi, a @ psi).real * a for a in oset.ops)
            _, v = herm_eig(grad, check=False)
            cand = v[:, -1]
            new = sum(np.vdot(cand, a @ cand).real ** 2 for a in oset.ops)
            if new <= val + tol:
                break
            psi, val = cand, new
        best = max(best, val)
    return float(best)


def flip_operator(d):
    """Two-particle swap F|ab> = |ba>; F^2 = I with eigenvalues +-1."""
    if d < 2:
        raise ValueError("local dimension must be at least 2")
    f = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            f[a * d + b, b * d + a] = 1
    return f


def sym_antisym_projectors(d):
    """Projectors (P_s, P_a) onto the symmetric/antisymmetric two-particle subspaces."""
    f = flip_operator(d)
    eye = np.eye(d * d, dtype=complex)
    return (eye + f) / 2, (eye - f) / 2


def sym_antisym_bases(d):
    """Orthonormal column bases (B_s, B_a) of the two-particle subspaces.

    Deterministic ordering: |kk> then (|kl>+|lk>)/sqrt2 for the symmetric part,
    (|kl>-|lk>)/sqrt2 for the antisymmetric part (k<l lexicographic).
    """
    sym = []
    for k in range(d):
        v = np.zeros(d * d, dtype=complex)
        v[k * d + k] = 1
        sym.append(v)
    anti = []
    for k, l in combinations(range(d), 2):
        v = np.zeros(d * d, dtype=complex)
        v[k * d + l] = 1 / np.sqrt(2)
        v[l * d + k] = 1 / np.sqrt(2)
        sym.append(v)
        w = np.zeros(d * d, dtype=complex)
        w[k * d + l] = 1 / np.sqrt(2)
        w[l * d + k] = -1 / np.sqrt(2)
        anti.append(w)
    return np.column_stack(sym), np.column_stack(anti)


def transposition_operator(layout: Layout, s, t):
    """Permutation matrix exchanging sites s and t."""
    n, d = layout.n_particles, layout.local_dim
    if not (0 <= s < n and 0 <= t < n):
        raise ValueError("site out of range")
    powers = d ** np.arange(n - 1, -1, -1)
    digits = (np.arange(layout.dim)[:, None] // powers[None, :]) % d
    swapped = digits.copy()
    swapped[:, [s, t]] = digits[:, [t, s]]
    target = swapped @ powers
    op = np.zeros((layout.dim, layout.dim), dtype=complex)
    op[target, np.arange(layout.dim)] = 1
    return op


def symmetrizer(layout: Layout):
    """Projector onto the fully symmetric subspace, averaged over all N! permutations.

    Restricted to N <= 8: the cost grows with N! and larger symmetrizers are
    not needed at desk scale.
    """
    n, d = layout.n_particles, layout.local_dim
    if n > 8:
        raise ValueError("symmetrizer restricted to at most 8 particles")
    powers = d ** np.arange(n - 1, -1, -1)
    digits = (np.arange(layout.dim)[:, None] // powers[None, :]) % d
    proj = np.zeros((layout.dim, layout.dim))
    src = np.arange(layout.dim)
    for perm in permutations(range(n)):
        target = digits[:, list(perm)] @ powers
        np.add.at(proj, (target, src), 1.0)
    return proj.astype(complex) / factorial(n)
