"""Independent verification machinery: product-state and two-producible
optimization, partial-transpose checks, the symmetric-state equivalence test,
and parameter scans over noise / temperature.

Every margin used here is a quadratic functional of collective moments,

    margin = const + sum_k [ alpha_k <A_k^2> + beta_k <A_k>^2
                             + gamma_k <sum_n (a_k^(n))^2> ],

with beta_k <= 0 for all implemented criteria, so the margin is concave in
each tensor factor separately.  The see-saw therefore moves each factor to the
bottom eigenvector of the local gradient (a Hermitian matrix), which never
increases the objective, and the minimum over products is attained at pure
factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import config
from .linalg import (
    Layout,
    dag,
    herm_eig,
    make_rng,
    partial_transpose,
    random_orthogonal,
    random_unitary,
)
from .observables import (
    CollectiveSet,
    ObservableSet,
    collectivize,
    gellmann_set,
    remix,
    spin_matrices,
    sym_antisym_bases,
)
from .criteria import (
    CriterionReport,
    eq9_from_table,
    evaluate_criteria,
    moment_table,
    obs1_from_table,
)
from .states import (
    average_two_particle_state,
    density,
    permutation_invariant,
    thermal_state,
    white_noise_mix,
)


@dataclass(frozen=True)
class OptimizationConfig:
    restarts: int = 64
    max_sweeps: int = 200
    tol_improve: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("need at least one restart")
        if self.tol_improve <= 0:
            raise ValueError("improvement tolerance must be positive")


# ---------------------------------------------------------------------------
# quadratic criterion representation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticCriterion:
    """Margin functional in collective moments; see the module docstring."""

    name: str
    oset: ObservableSet
    n_particles: int
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    const: float

    def margin_state(self, state, cset: CollectiveSet | None = None) -> float:
        """Exact margin on an arbitrary state via the moment table."""
        cset = collectivize(self.oset, self.n_particles) if cset is None else cset
        t = moment_table(state, cset)
        return float(
            self.const
            + self.alpha @ t.raw_seconds
            + self.beta @ t.means**2
            + self.gamma @ t.local_square_sums
        )

    def margin_locals(self, blocks, kets) -> float:
        """Margin of a product over `blocks` from block-local moments only."""
        v, u, x = _block_moments(self, blocks, kets)
        return _margin_from_moments(self, v, u, x)


def quad_obs1(oset: ObservableSet, n_particles, index_set) -> QuadraticCriterion:
    m = len(oset)
    idx = sorted(set(index_set))
    alpha = np.full(m, -1.0)
    beta = np.zeros(m)
    gamma = np.ones(m)
    alpha[idx] = n_particles - 1
    beta[idx] = -(n_particles - 1)
    gamma[idx] = -(n_particles - 1)
    const = n_particles * (n_particles - 1) * oset.k_bound
    label = "eq4[I=" + ",".join(map(str, idx)) + "]"
    return QuadraticCriterion(label, oset, n_particles, alpha, beta, gamma, const)


def quad_eq5(j, n_particles, which, m_axis=2) -> QuadraticCriterion:
    oset = spin_matrices(j)
    n = n_particles
    alpha = np.zeros(3)
    beta = np.zeros(3)
    gamma = np.zeros(3)
    if which == "a":
        alpha[:] = -1.0
        const = n * j * (n * j + 1)
    elif which == "b":
        alpha[:] = 1.0
        beta[:] = -1.0
        const = -n * j
    elif which in ("c", "d"):
        others = [a for a in range(3) if a != m_axis]
        if which == "c":
            alpha[m_axis] = n - 1
            beta[m_axis] = -(n - 1)
            gamma[m_axis] = -(n - 1)
            alpha[others] = -1.0
            gamma[others] = 1.0
        else:
            alpha[others] = n - 1
            beta[others] = -(n - 1)
            gamma[others] = -(n - 1)
            alpha[m_axis] = -1.0
            gamma[m_axis] = 1.0
        const = n * (n - 1) * j * j
    else:
        raise ValueError("which must be one of a, b, c, d")
    name = f"eq5{which}" if which in ("a", "b") else f"eq5{which}-{'xyz'[m_axis]}"
    return QuadraticCriterion(name, oset, n, alpha, beta, gamma, float(const))


def quad_eq1(j, n_particles, axes=(0, 1, 2)) -> QuadraticCriterion:
    a, b, c = axes
    alpha = np.zeros(3)
    beta = np.zeros(3)
    alpha[a] = n_particles
    beta[a] = -n_particles
    beta[b] = -1.0
    beta[c] = -1.0
    return QuadraticCriterion("eq1", spin_matrices(j), n_particles,
                              alpha, beta, np.zeros(3), 0.0)


def quad_eq7(j, n_particles, axes=(0, 1, 2)) -> QuadraticCriterion:
    a, b, c = axes
    n = n_particles
    alpha = np.zeros(3)
    beta = np.zeros(3)
    gamma = np.zeros(3)
    alpha[a] = n
    beta[a] = -n
    beta[b] = -1.0
    beta[c] = -1.0
    gamma[a] = -n
    return QuadraticCriterion("eq7", spin_matrices(j), n,
                              alpha, beta, gamma, float(n * n * j * j))


def quad_eq9(d, n_particles) -> QuadraticCriterion:
    oset = gellmann_set(d)
    m = len(oset)
    return QuadraticCriterion("eq9", oset, n_particles, np.ones(m), -np.ones(m),
                              np.zeros(m), -2.0 * n_particles * (d - 1))


def quad_eq10(d, n_particles) -> QuadraticCriterion:
    oset = gellmann_set(d)
    m = len(oset)
    bound = 2 * n_particles * (d - 2) + (2 if n_particles % 2 else 0)
    return QuadraticCriterion("eq10", oset, n_particles, np.ones(m), -np.ones(m),
                              np.zeros(m), -float(bound))


def quad_eq11(d, n_particles, index_set) -> QuadraticCriterion:
    oset = gellmann_set(d)
    m = len(oset)
    n = n_particles
    idx = sorted(set(index_set))
    alpha = np.zeros(m)
    beta = np.zeros(m)
    gamma = np.zeros(m)
    alpha[idx] = n
    beta[idx] = -(n - 1)
    gamma[idx] = -n
    label = "eq11[I=" + ",".join(map(str, idx)) + "]"
    return QuadraticCriterion(label, oset, n, alpha, beta, gamma, 0.0)


# ---------------------------------------------------------------------------
# block structure and see-saw
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    """One tensor factor of the optimization: 1 or 2 sites of the layout."""

    sites: tuple
    ops: tuple        # block-collective operator per k
    sq_ops: tuple     # sum over block sites of (a_k)^2, embedded in the block
    op_squares: tuple  # square of the block-collective operator per k
    basis: np.ndarray | None = None  # optional column basis restricting the block


def _single_block(oset: ObservableSet, site) -> Block:
    sq = tuple(a @ a for a in oset.ops)
    return Block((site,), tuple(oset.ops), sq, sq)


def _pair_block(oset: ObservableSet, sites, basis=None) -> Block:
    d = oset.local_dim
    eye = np.eye(d, dtype=complex)
    ops = tuple(np.kron(a, eye) + np.kron(eye, a) for a in oset.ops)
    sq = tuple(np.kron(a @ a, eye) + np.kron(eye, a @ a) for a in oset.ops)
    opsq = tuple(b @ b for b in ops)
    return Block(tuple(sites), ops, sq, opsq, basis)


def _block_moments(quad, blocks, kets):
    m = len(quad.oset)
    nb = len(blocks)
    v = np.empty((m, nb))
    u = np.empty((m, nb))
    x = np.empty((m, nb))
    for b, (block, ket) in enumerate(zip(blocks, kets)):
        psi = block.basis @ ket if block.basis is not None else ket
        for k in range(m):
            y = block.ops[k] @ psi
            v[k, b] = np.vdot(psi, y).real
            u[k, b] = np.vdot(y, y).real
            x[k, b] = np.vdot(psi, block.sq_ops[k] @ psi).real
    return v, u, x


def _margin_from_moments(quad, v, u, x):
    s = v.sum(axis=1)
    raw = u.sum(axis=1) + s**2 - (v**2).sum(axis=1)
    return float(
        quad.const + quad.alpha @ raw + quad.beta @ s**2 + quad.gamma @ x.sum(axis=1)
    )


def _random_block_ket(block, rng):
    dim = block.basis.shape[1] if block.basis is not None else block.ops[0].shape[0]
    ket = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return ket / np.linalg.norm(ket)


def _seesaw(quad, blocks, rng, max_sweeps, tol_improve):
    """Coordinate descent over blocks; monotone because beta_k <= 0."""
    m = len(quad.oset)
    kets = [_random_block_ket(b, rng) for b in blocks]
    v, u, x = _block_moments(quad, blocks, kets)
    best = _margin_from_moments(quad, v, u, x)
    converged = False
    for _ in range(max_sweeps):
        for b, block in enumerate(blocks):
            s = v.sum(axis=1)
            coeff = 2 * (quad.alpha + quad.beta) * s - 2 * quad.alpha * v[:, b]
            grad = sum(
                quad.alpha[k] * block.op_squares[k]
                + quad.gamma[k] * block.sq_ops[k]
                + coeff[k] * block.ops[k]
                for k in range(m)
            )
            if block.basis is not None:
                grad = dag(block.basis) @ grad @ block.basis
            _, vecs = herm_eig(grad, check=False)
            cand = vecs[:, 0]
            psi = block.basis @ cand if block.basis is not None else cand
            for k in range(m):
                y = block.ops[k] @ psi
                v[k, b] = np.vdot(psi, y).real
                u[k, b] = np.vdot(y, y).real
                x[k, b] = np.vdot(psi, block.sq_ops[k] @ psi).real
            kets[b] = cand
        margin = _margin_from_moments(quad, v, u, x)
        if best - margin < tol_improve:
            best = min(best, margin)
            converged = True
            break
        best = margin
    return best, kets, converged


@dataclass(frozen=True)
class OptimizationResult:
    margin: float
    blocks: tuple          # tuple of site tuples
    kets: tuple            # optimal pure state per block (full block space)
    restart: int
    converged: bool
    variant: str = "free"


def _run_restarts(quad, blocks, cfg: OptimizationConfig, variant="free"):
    best = None
    for r in range(cfg.restarts):
        rng = make_rng(cfg.seed + r)
        margin, kets, conv = _seesaw(quad, blocks, rng, cfg.max_sweeps, cfg.tol_improve)
        if best is None or margin < best.margin - cfg.tol_improve:
            full = tuple(
                (b.basis @ k if b.basis is not None else k) for b, k in zip(blocks, kets)
            )
            best = OptimizationResult(margin, tuple(b.sites for b in blocks), full,
                                      r, conv, variant)
    return best


def minimize_over_products(quad: QuadraticCriterion, config: OptimizationConfig | None = None):
    """Multi-start see-saw minimization of a criterion margin over pure product states.

    Returns an :class:`OptimizationResult`; ``margin`` below the separable
    bound by more than ~1e-5 indicates a defect in the criterion or the
    operator set, not entanglement.
    """
    cfg = config or OptimizationConfig()
    blocks = [_single_block(quad.oset, s) for s in range(quad.n_particles)]
    return _run_restarts(quad, blocks, cfg)


def _pairings(sites):
    """All partitions of `sites` into pairs and singletons."""
    sites = list(sites)
    if not sites:
        yield []
        return
    first, rest = sites[0], sites[1:]
    for tail in _pairings(rest):
        yield [(first,)] + tail
    for i, partner in enumerate(rest):
        remaining = rest[:i] + rest[i + 1:]
        for tail in _pairings(remaining):
            yield [(first, partner)] + tail


def minimize_over_two_producible(quad: QuadraticCriterion,
                                 config: OptimizationConfig | None = None):
    """Minimize a criterion margin over pure two-producible states.

    Enumerates all pairings of sites into pairs and singletons (N <= 6), runs
    the block see-saw on each, and refines pair blocks restricted to the
    symmetric and antisymmetric subspaces, where the extremal pair states
    live.
    """
    cfg = config or OptimizationConfig()
    n = quad.n_particles
    if n > 6:
        raise ValueError("two-producible optimization restricted to at most 6 sites")
    d = quad.oset.local_dim
    basis_s, basis_a = sym_antisym_bases(d)
    best = None
    for pairing in _pairings(range(n)):
        variants = [("free", None)]
        if any(len(b) == 2 for b in pairing):
            variants += [("sym", basis_s), ("antisym", basis_a)]
        for variant, basis in variants:
            blocks = [
                _single_block(quad.oset, b[0]) if len(b) == 1
                else _pair_block(quad.oset, b, basis)
                for b in pairing
            ]
            res = _run_restarts(quad, blocks, cfg, variant)
            if best is None or res.margin < best.margin - cfg.tol_improve:
                best = res
    return best


# ---------------------------------------------------------------------------
# partial-transpose checks
# ---------------------------------------------------------------------------

def ppt_min_eigenvalue(rho, sites, layout: Layout) -> float:
    """Minimum eigenvalue of the partial transpose over `sites`."""
    pt = partial_transpose(density(rho), sites, layout)
    w, _ = herm_eig(pt)
    return float(w[0])


def bipartitions(n_particles):
    """One representative per inequivalent cut: the side containing site 0."""
    first = []
    for mask in range(1, 2 ** (n_particles - 1)):
        cut = tuple(s for s in range(n_particles) if (mask >> s) & 1 or s == 0)
        if len(cut) < n_particles and cut not in first:
            first.append(cut)
    return [c for c in sorted(set(first), key=lambda c: (len(c), c))]


def min_t1_over_cuts(rho, layout: Layout):
    """Minimum partial-transpose eigenvalue per inequivalent bipartition."""
    rho = density(rho)
    return {cut: ppt_min_eigenvalue(rho, cut, layout) for cut in bipartitions(layout.n_particles)}


# ---------------------------------------------------------------------------
# symmetric-state equivalence test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Obs6Report:
    t1_min_eigenvalue: float
    violation_found: bool
    best_margin: float
    best_index_set: tuple
    found_restart: int | None
    restarts_used: int
    consistent: bool

    def to_dict(self):
        return {
            "t1_min_eigenvalue": self.t1_min_eigenvalue,
            "violation_found": self.violation_found,
            "best_margin": self.best_margin,
            "best_index_set": list(self.best_index_set),
            "found_restart": self.found_restart,
            "restarts_used": self.restarts_used,
            "consistent": self.consistent,
        }


def obs6_equivalence_test(rho, layout: Layout, config: OptimizationConfig | None = None) -> Obs6Report:
    """Symmetric-state criterion versus the two-particle partial transpose.

    Computes the averaged two-particle state and its partial-transpose minimum
    eigenvalue, then searches for a violated symmetric-state inequality over
    index sets and generator choices g'_k = sum_l O_kl (U g_l U+).  The search
    direction is best effort (a miss is reported, not asserted); the forward
    direction - a found violation implies a negative partial transpose - is an
    exact statement and is exposed through the `consistent` flag.
    """
    cfg = config or OptimizationConfig()
    rho = density(rho)
    if not permutation_invariant(rho, layout):
        raise ValueError("the symmetric-state test requires a permutation-invariant state")
    n, d = layout.n_particles, layout.local_dim
    av2 = average_two_particle_state(rho, layout)
    t1_min = ppt_min_eigenvalue(av2, (0,), Layout(2, d))

    base = gellmann_set(d)
    best_margin = np.inf
    best_idx = ()
    found_restart = None
    restarts_used = 0
    for r in range(cfg.restarts):
        restarts_used = r + 1
        if r == 0:
            oset = base
        else:
            rng = make_rng(cfg.seed + r)
            oset = remix(base, random_orthogonal(len(base), rng), random_unitary(d, rng))
        table = moment_table(rho, collectivize(oset, n))
        terms = n * table.mod_variances + table.means**2
        neg = np.flatnonzero(terms < 0)
        margin = float(terms[neg].sum()) if neg.size else 0.0
        if margin < best_margin:
            best_margin = margin
            best_idx = tuple(int(i) for i in neg)
        if margin < -config.get("TOL_VIOLATE"):
            found_restart = r
            break
    violation = found_restart is not None
    consistent = (not violation) or t1_min < 0
    return Obs6Report(t1_min, violation, best_margin, best_idx,
                      found_restart, restarts_used, consistent)


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRow:
    param: float
    margins: dict              # criterion id -> margin (None when inapplicable)
    t1_min: dict               # bipartition tuple -> min eigenvalue
    classification: str

    def to_dict(self):
        return {
            "param": self.param,
            "margins": dict(self.margins),
            "t1_min": {" ".join(map(str, k)): v for k, v in self.t1_min.items()},
            "classification": self.classification,
        }


def classify_row(margins, t1_min):
    finite = [m for m in margins.values() if m is not None]
    violated = bool(finite) and min(finite) < -config.get("TOL_VIOLATE")
    all_ppt = min(t1_min.values()) >= -config.get("TOL_PSD")
    if all_ppt:
        return "PPT-and-violating" if violated else "separable-consistent"
    return "NPT-entangled" if violated else "undetected"


def _scan_rows(states, params, layout, criteria, set_name=None):
    rows = []
    for p, rho in zip(params, states):
        reports = evaluate_criteria(rho, layout, criteria, set_name=set_name)
        margins = {}
        for rep in reports:
            margins[rep.criterion] = None if rep.status != "ok" else rep.margin
        t1 = min_t1_over_cuts(rho, layout)
        rows.append(ScanRow(float(p), margins, t1, classify_row(margins, t1)))
    return rows


def noise_scan(base_state, layout: Layout, noise_fractions, criteria=("eq9",),
               set_name=None):
    """Margins, partial-transpose evidence and classification along a white-noise ramp."""
    ps = [float(p) for p in noise_fractions]
    if any(p < 0 or p > 1 for p in ps):
        raise ValueError("noise grid must lie within [0, 1]")
    states = [white_noise_mix(base_state, p) for p in ps]
    return _scan_rows(states, ps, layout, criteria, set_name)


def thermal_scan(hamiltonian, layout: Layout, temperatures, criteria=("eq9",),
                 set_name=None):
    """Same as :func:`noise_scan` along a temperature grid for exp(-H/T)/Z."""
    ts = [float(t) for t in temperatures]
    if any(t <= 0 for t in ts) or list(ts) != sorted(ts):
        raise ValueError("temperature grid must be positive and ascending")
    states = [thermal_state(hamiltonian, t) for t in ts]
    return _scan_rows(states, ts, layout, criteria, set_name)


# ---------------------------------------------------------------------------
# bound verification (wrapped by the CLI)
# ---------------------------------------------------------------------------

ALARM_MARGIN = -1e-5  # a product-state margin below this is a correctness alarm


def verify_product_bounds(oset: ObservableSet, n_particles, index_sets=None,
                          config: OptimizationConfig | None = None):
    """Minimize each index-set inequality over products; returns result per set."""
    cfg = config or OptimizationConfig()
    m = len(oset)
    if index_sets is None:
        from .criteria import all_index_sets, canonical_index_sets
        index_sets = all_index_sets(m) if m <= 3 else canonical_index_sets(m)
    out = {}
    for idx in index_sets:
        quad = quad_obs1(oset, n_particles, idx)
        out[tuple(sorted(set(idx)))] = minimize_over_products(quad, cfg)
    return out
