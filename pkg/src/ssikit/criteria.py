"""Moment tables and the family of collective-observable separability criteria.

Every criterion is reported with a single orientation: margin = lhs - rhs,
satisfied iff margin >= 0, violated iff margin < -TOL_VIOLATE.  Violation of
any criterion except the unconditional bound ``eq5a`` witnesses entanglement
(``eq10`` witnesses three-particle entanglement).

The catalog (see README for the full formulas):

========  ==================================================================
eq1       N Var(J_a) >= <J_b>^2 + <J_c>^2                 (qubit-exact form)
eq4       (N-1) sum_{k in I} mod-var_k + N(N-1) K >= sum_{k not in I} mod-2nd_k
eq5a      <J_x^2>+<J_y^2>+<J_z^2> <= Nj(Nj+1)             (all states)
eq5b      Var(J_x)+Var(J_y)+Var(J_z) >= Nj
eq5c-m    (N-1) mod-var_m + N(N-1) j^2 >= mod-2nd_k + mod-2nd_l
eq5d-m    (N-1)(mod-var_k + mod-var_l) >= mod-2nd_m - N(N-1) j^2
eq7       N [Var(J_a) + sum_n (j^2 - <(j_a at n)^2>)] >= <J_b>^2 + <J_c>^2
eq9       sum_k Var(G_k) >= 2N(d-1)
eq10      sum_k Var(G_k) >= 2N(d-2) + 2 [N odd]           (two-producible)
eq11      sum_{k in I} [N mod-var_k + <G_k>^2] >= 0       (symmetric states)
========  ==================================================================

Modified moments subtract the single-particle square terms:
mod-2nd_k = <A_k^2> - <sum_n (a_k^(n))^2> and mod-var_k = mod-2nd_k - <A_k>^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from . import config
from .linalg import Layout, expectation
from .observables import CollectiveSet, collectivize, gellmann_set, set_by_name, spin_matrices
from .states import density, permutation_invariant, white_noise_mix

AXIS_NAMES = ("x", "y", "z")


@dataclass(frozen=True)
class MomentTable:
    """First/second moments of the collective operators of one set on one state."""

    set_name: str
    n_particles: int
    local_dim: int
    k_bound: float
    means: np.ndarray              # <A_k>
    raw_seconds: np.ndarray        # <A_k^2>
    local_square_sums: np.ndarray  # <sum_n (a_k^(n))^2>

    @property
    def mod_seconds(self):
        return self.raw_seconds - self.local_square_sums

    @property
    def mod_variances(self):
        return self.raw_seconds - self.means**2 - self.local_square_sums

    @property
    def variances(self):
        return self.raw_seconds - self.means**2


@dataclass(frozen=True)
class CriterionReport:
    criterion: str
    index_set: tuple | None
    lhs: float
    rhs: float
    margin: float
    violated: bool
    status: str = "ok"

    def to_dict(self):
        return {
            "criterion": self.criterion,
            "I": None if self.index_set is None else list(self.index_set),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "violated": self.violated,
            "status": self.status,
        }


def _report(criterion, lhs, rhs, index_set=None, status="ok"):
    margin = float(lhs) - float(rhs)
    violated = status == "ok" and margin < -config.get("TOL_VIOLATE")
    return CriterionReport(criterion, index_set, float(lhs), float(rhs), margin, violated, status)


def moment_table(state, cset: CollectiveSet) -> MomentTable:
    """Means, raw second moments and local square sums for every A_k."""
    state = np.asarray(state, dtype=complex)
    m = len(cset)
    means = np.empty(m)
    raw = np.empty(m)
    locsq = np.empty(m)
    if state.ndim == 1:
        if state.shape[0] != cset.layout.dim:
            raise ValueError("state dimension does not match the collective set")
        for k, a in enumerate(cset.collective_ops):
            y = a @ state
            means[k] = np.vdot(state, y).real
            raw[k] = np.vdot(y, y).real
            locsq[k] = expectation(state, cset.local_square_sums[k])
    else:
        if state.shape != (cset.layout.dim,) * 2:
            raise ValueError("state dimension does not match the collective set")
        for k, a in enumerate(cset.collective_ops):
            means[k] = expectation(state, a)
            raw[k] = np.einsum("ij,jk,ki->", a, state, a).real
            locsq[k] = expectation(state, cset.local_square_sums[k])
    return MomentTable(
        cset.base.name, cset.layout.n_particles, cset.layout.local_dim,
        cset.base.k_bound, means, raw, locsq,
    )


# ---------------------------------------------------------------------------
# index sets
# ---------------------------------------------------------------------------

def canonical_index_sets(m):
    """Empty set, full set, singletons, and complements of singletons."""
    sets = [(), tuple(range(m))]
    sets += [(k,) for k in range(m)]
    sets += [tuple(i for i in range(m) if i != k) for k in range(m)]
    seen, unique = set(), []
    for s in sets:
        if s not in seen:
            seen.add(s)
            unique.append(s)
    return unique


def all_index_sets(m):
    """All 2^m index sets; refuses m > 10 (use the canonical family instead)."""
    if m > 10:
        raise ValueError("full enumeration is limited to 10 operators")
    out = []
    for size in range(m + 1):
        out.extend(combinations(range(m), size))
    return out


def _validate_index_set(index_set, m):
    idx = tuple(sorted(set(int(i) for i in index_set)))
    if idx and (idx[0] < 0 or idx[-1] >= m):
        raise ValueError(f"index set {index_set} out of range for {m} operators")
    return idx


# ---------------------------------------------------------------------------
# the general two-sided family (one inequality per index set)
# ---------------------------------------------------------------------------

def obs1_from_table(table: MomentTable, index_set) -> CriterionReport:
    idx = _validate_index_set(index_set, len(table.means))
    n, k_bound = table.n_particles, table.k_bound
    in_set = np.zeros(len(table.means), dtype=bool)
    in_set[list(idx)] = True
    lhs = (n - 1) * table.mod_variances[in_set].sum() + n * (n - 1) * k_bound
    rhs = table.mod_seconds[~in_set].sum()
    return _report("eq4", lhs, rhs, index_set=idx)


def obs1_margin(state, cset: CollectiveSet, index_set) -> CriterionReport:
    """Separability bound for one index set I of the 2^M family."""
    return obs1_from_table(moment_table(state, cset), index_set)


# ---------------------------------------------------------------------------
# optimal angular-momentum criteria
# ---------------------------------------------------------------------------

def _spin_cset(state, j):
    d = round(2 * j) + 1
    dim = np.asarray(state).shape[0]
    n = round(np.log(dim) / np.log(d))
    if d**n != dim:
        raise ValueError(f"state dimension {dim} is not a power of d={d}")
    return collectivize(spin_matrices(j), n)


def optimal_ssi_from_table(table: MomentTable, j) -> list[CriterionReport]:
    n = table.n_particles
    ms = table.mod_seconds
    mv = table.mod_variances
    reports = [
        _report("eq5a", n * j * (n * j + 1), table.raw_seconds.sum()),
        _report("eq5b", table.variances.sum(), n * j),
    ]
    for m_axis in range(3):
        k_axis, l_axis = [a for a in range(3) if a != m_axis]
        name = AXIS_NAMES[m_axis]
        reports.append(_report(
            f"eq5c-{name}",
            (n - 1) * mv[m_axis] + n * (n - 1) * j * j,
            ms[k_axis] + ms[l_axis],
        ))
        reports.append(_report(
            f"eq5d-{name}",
            (n - 1) * (mv[k_axis] + mv[l_axis]),
            ms[m_axis] - n * (n - 1) * j * j,
        ))
    return reports


def optimal_ssi_report(state, j, cset: CollectiveSet | None = None) -> list[CriterionReport]:
    """The eight tight angular-momentum inequalities (two symmetric + three axes each)."""
    cset = _spin_cset(state, j) if cset is None else cset
    return optimal_ssi_from_table(moment_table(state, cset), j)


def standard_ssi_from_table(table: MomentTable, axes=(0, 1, 2)) -> CriterionReport:
    a, b, c = axes
    n = table.n_particles
    denom = table.means[b] ** 2 + table.means[c] ** 2
    status = "ok" if denom > config.get("TOL_DENOM") else "inapplicable"
    return _report("eq1", n * table.variances[a], denom, status=status)


def standard_ssi_margin(state, j, cset=None, axes=(0, 1, 2)) -> CriterionReport:
    """Polarization-normalized squeezing bound; exact for qubits only.

    `axes` fixes (squeezed axis, mean axis, mean axis).  A vanishing mean-square
    denominator yields status "inapplicable" rather than a sign claim.
    """
    cset = _spin_cset(state, j) if cset is None else cset
    return standard_ssi_from_table(moment_table(state, cset), axes)


def mapped_ssi_from_table(table: MomentTable, j, axes=(0, 1, 2)) -> CriterionReport:
    a, b, c = axes
    n = table.n_particles
    denom = table.means[b] ** 2 + table.means[c] ** 2
    correction = n * j * j - table.local_square_sums[a]
    status = "ok" if denom > config.get("TOL_DENOM") else "inapplicable"
    return _report("eq7", n * (table.variances[a] + correction), denom, status=status)


def mapped_ssi_margin(state, j, cset=None, axes=(0, 1, 2)) -> CriterionReport:
    """Spin-j-safe version of eq1 with the nonnegative local correction term."""
    cset = _spin_cset(state, j) if cset is None else cset
    return mapped_ssi_from_table(moment_table(state, cset), j, axes)


def transform_qubit_criterion(func, j):
    """Rescale a qubit criterion functional to spin-j moments.

    `func(means, mod_seconds, n_particles)` must be a concave function of the
    collective means and modified second moments (the caller asserts the
    concavity; it is not machine-checked).  The returned evaluator applies
    means -> means/(2j) and mod_seconds -> mod_seconds/(4 j^2), which preserves
    the separable minimum.
    """
    scale = 2 * j

    def transformed(means, mod_seconds, n_particles):
        return func(np.asarray(means) / scale, np.asarray(mod_seconds) / scale**2, n_particles)

    return transformed


def eq1_qubit_form(means, mod_seconds, n_particles, axes=(0, 1, 2)):
    """The eq1 margin as a concave function of qubit means and modified second moments."""
    a, b, c = axes
    n = n_particles
    return n * (mod_seconds[a] + n / 4 - means[a] ** 2) - means[b] ** 2 - means[c] ** 2


# ---------------------------------------------------------------------------
# generator-set criteria
# ---------------------------------------------------------------------------

def eq9_from_table(table: MomentTable) -> CriterionReport:
    n, d = table.n_particles, table.local_dim
    return _report("eq9", table.variances.sum(), 2 * n * (d - 1))


def sud_singlet_margin(state, d, cset: CollectiveSet | None = None) -> CriterionReport:
    """Total generator variance bound; maximal violation flags many-body singlets."""
    if cset is None:
        dim = np.asarray(state).shape[0]
        n = round(np.log(dim) / np.log(d))
        cset = collectivize(gellmann_set(d), n)
    return eq9_from_table(moment_table(state, cset))


def eq10_from_table(table: MomentTable) -> CriterionReport:
    n, d = table.n_particles, table.local_dim
    bound = 2 * n * (d - 2) + (2 if n % 2 else 0)
    return _report("eq10", table.variances.sum(), bound)


def two_producible_margin(state, d, cset: CollectiveSet | None = None) -> CriterionReport:
    """Variance bound satisfied by all two-producible states; violation flags
    three-particle entanglement."""
    if cset is None:
        dim = np.asarray(state).shape[0]
        n = round(np.log(dim) / np.log(d))
        cset = collectivize(gellmann_set(d), n)
    return eq10_from_table(moment_table(state, cset))


def eq11_from_table(table: MomentTable, index_set) -> CriterionReport:
    idx = _validate_index_set(index_set, len(table.means))
    n = table.n_particles
    terms = n * table.mod_variances + table.means**2
    lhs = terms[list(idx)].sum() if idx else 0.0
    return _report("eq11", lhs, 0.0, index_set=idx)


def symmetric_margin(state, cset: CollectiveSet, index_set) -> CriterionReport:
    """Symmetric-state criterion; exact for full generator sets on bosonic states.

    Refuses states that are not permutation invariant, since the equivalence
    with the two-particle partial-transpose test only holds for symmetric
    states.
    """
    if not permutation_invariant(density(state), cset.layout):
        raise ValueError("symmetric-state criterion requires a permutation-invariant state")
    return eq11_from_table(moment_table(state, cset), index_set)


# ---------------------------------------------------------------------------
# noise thresholds
# ---------------------------------------------------------------------------

class NoiseThresholds(NamedTuple):
    generator_variance: float  # white-noise threshold of eq9: d/(d+1)
    spin_variance: float       # white-noise threshold of eq5b: 2/(d+1)


def noise_threshold(d) -> NoiseThresholds:
    """Analytic white-noise tolerances for singlet detection."""
    if d < 2:
        raise ValueError("local dimension must be at least 2")
    return NoiseThresholds(d / (d + 1), 2 / (d + 1))


def noise_threshold_empirical(state, margin_fn, tol=1e-6, lo=0.0, hi=1.0):
    """Bisection root of p -> margin_fn(white_noise_mix(state, p)).

    Expects a violated margin at `lo` and a satisfied one at `hi` (the margin
    is affine in p for the variance criteria, so the root is unique).
    """
    f_lo = margin_fn(white_noise_mix(state, lo))
    f_hi = margin_fn(white_noise_mix(state, hi))
    if not (f_lo < 0 <= f_hi):
        raise ValueError(f"margin does not change sign on [{lo}, {hi}]: {f_lo:g} .. {f_hi:g}")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if margin_fn(white_noise_mix(state, mid)) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


# ---------------------------------------------------------------------------
# named evaluation (shared by the CLI and the scanners)
# ---------------------------------------------------------------------------

CRITERION_NAMES = (
    "eq1", "eq4", "eq5a", "eq5b", "eq5c", "eq5d", "opt-ssi",
    "eq7", "eq9", "eq10", "eq11",
)


def evaluate_criteria(state, layout: Layout, names, set_name=None, index_sets=None,
                      axes=(0, 1, 2)) -> list[CriterionReport]:
    """Evaluate named criteria on one state, building the needed operator sets.

    `set_name` overrides the default operator set for the eq4 family; spin
    criteria use j = (d-1)/2 and the generator criteria the canonical
    traceless basis.  Criteria whose preconditions fail (non-symmetric state
    for eq11) are reported in-band with status "inapplicable".
    """
    names = list(names)
    if "all" in names:
        names = ["eq5a", "eq5b", "eq5c", "eq5d", "eq1", "eq7", "eq4", "eq9", "eq10", "eq11"]
    if "opt-ssi" in names:
        names = [n for n in names if n != "opt-ssi"] + ["eq5a", "eq5b", "eq5c", "eq5d"]
    unknown = [n for n in names if n not in CRITERION_NAMES]
    if unknown:
        raise ValueError(f"unknown criteria {unknown}; choose from {sorted(CRITERION_NAMES)}")

    n, d = layout.n_particles, layout.local_dim
    j = (d - 1) / 2
    tables = {}

    def table_for(oset):
        if oset.name not in tables:
            tables[oset.name] = moment_table(state, collectivize(oset, n))
        return tables[oset.name]

    spin_table = lambda: table_for(spin_matrices(j))
    gm_table = lambda: table_for(gellmann_set(d))

    reports = []
    for name in names:
        if name == "eq1":
            reports.append(standard_ssi_from_table(spin_table(), axes))
        elif name == "eq7":
            reports.append(mapped_ssi_from_table(spin_table(), j, axes))
        elif name == "eq5a":
            reports.append(optimal_ssi_from_table(spin_table(), j)[0])
        elif name == "eq5b":
            reports.append(optimal_ssi_from_table(spin_table(), j)[1])
        elif name == "eq5c":
            reports.extend(r for r in optimal_ssi_from_table(spin_table(), j)
                           if r.criterion.startswith("eq5c"))
        elif name == "eq5d":
            reports.extend(r for r in optimal_ssi_from_table(spin_table(), j)
                           if r.criterion.startswith("eq5d"))
        elif name == "eq4":
            oset = set_by_name(set_name) if set_name else spin_matrices(j)
            table = table_for(oset)
            m = len(oset)
            sets = index_sets
            if sets is None:
                sets = all_index_sets(m) if m <= 3 else canonical_index_sets(m)
            reports.extend(obs1_from_table(table, i) for i in sets)
        elif name == "eq9":
            reports.append(eq9_from_table(gm_table()))
        elif name == "eq10":
            reports.append(eq10_from_table(gm_table()))
        elif name == "eq11":
            if n >= 2 and permutation_invariant(state, layout):
                sets = index_sets if index_sets is not None else canonical_index_sets(d * d - 1)
                table = gm_table()
                reports.extend(eq11_from_table(table, i) for i in sets)
            else:
                reports.append(_report("eq11", 0.0, 0.0, status="inapplicable"))
    return reports
