"""State constructions: products, coherent states, Dicke states, singlets,
white-noise mixtures, thermal states, random states, and the qubit-to-qudit lift.

Pure states are 1-D complex amplitude vectors, mixed states 2-D density
matrices.  Random constructions take an explicit numpy Generator (see
:func:`ssikit.linalg.make_rng`); there is no hidden global generator.
"""

from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np

from . import config
from .linalg import (
    Layout,
    dag,
    frob,
    herm_eig,
    herm_unitary,
    identity,
    kron_all,
    make_rng,
    partial_trace,
)
from .observables import (
    CollectiveSet,
    collectivize,
    flip_operator,
    gellmann_set,
    spin_matrices,
    symmetrizer,
    transposition_operator,
)


def density(state):
    """|psi><psi| for a ket; density matrices pass through unchanged."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


# ---------------------------------------------------------------------------
# random states
# ---------------------------------------------------------------------------

def random_pure(dim, rng):
    """Rotation-invariant random ket: normalized complex Gaussian vector."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density(dim, rng):
    """Random full-rank density matrix G G+ / Tr(G G+) with Gaussian G."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ dag(g)
    return rho / np.trace(rho).real


def random_product(layout: Layout, rng):
    """Tensor product of independent random pure locals."""
    return kron_all([random_pure(layout.local_dim, rng) for _ in layout.sites()])


def random_symmetric_density(layout: Layout, rng):
    """Random state supported on the fully symmetric (bosonic) subspace."""
    proj = symmetrizer(layout)
    rho = proj @ random_density(layout.dim, rng) @ proj
    return rho / np.trace(rho).real


# ---------------------------------------------------------------------------
# product and coherent states
# ---------------------------------------------------------------------------

def product_state(locals_):
    """Tensor product of normalized single-particle kets."""
    locals_ = [np.asarray(v, dtype=complex) for v in locals_]
    d = locals_[0].shape[0]
    for v in locals_:
        if v.ndim != 1 or v.shape[0] != d:
            raise ValueError("local states must be kets of a common dimension")
        if abs(np.linalg.norm(v) - 1) > 1e-8:
            raise ValueError("local states must be normalized")
    psi = kron_all(locals_)
    return psi / np.linalg.norm(psi)


def bloch_vector(qubit_ket):
    """(x, y, z) expectation values of the Pauli matrices."""
    a, b = np.asarray(qubit_ket, dtype=complex)
    cross = np.conj(a) * b
    return np.array([2 * cross.real, 2 * cross.imag, abs(a) ** 2 - abs(b) ** 2])


def coherent_spin_state(j, direction, n_particles=1):
    """|+j> along `direction`, tensored over N particles.

    The local state is the highest-weight eigenvector of direction.(jx,jy,jz),
    built as R_z(phi) R_y(theta) |m=+j> so its phase is deterministic.
    """
    n = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        raise ValueError("direction must be a nonzero vector")
    n = n / norm
    sset = spin_matrices(j)
    _, jy, jz = sset.ops
    theta = np.arccos(np.clip(n[2], -1.0, 1.0))
    phi = np.arctan2(n[1], n[0])
    top = np.zeros(sset.local_dim, dtype=complex)
    top[0] = 1.0
    local = herm_unitary(jz, phi) @ (herm_unitary(jy, theta) @ top)
    return product_state([local] * n_particles)


def lift_qubit_product(qubit_kets, j):
    """Map each qubit pure state to the spin-j coherent state along its Bloch vector.

    The lifted local satisfies <j_l> = j * (Bloch component), so moments scaled
    by 1/(2j) and 1/(4 j^2) match the original qubit moments.
    """
    locals_ = []
    for q in qubit_kets:
        q = np.asarray(q, dtype=complex)
        if q.shape != (2,) or abs(np.linalg.norm(q) - 1) > 1e-8:
            raise ValueError("expected normalized single-qubit kets")
        locals_.append(coherent_spin_state(j, bloch_vector(q)))
    return product_state(locals_)


# ---------------------------------------------------------------------------
# Dicke states and singlets
# ---------------------------------------------------------------------------

def dicke_state(n_particles, j, n_up=None):
    """Equal superposition of all placements of n_up extremal-up locals.

    Sites carrying an excitation are in |m=+j>, the rest in |m=-j>.  The
    default n_up = N/2 (requires even N) is the pattern that makes the state
    an extremal violator of the planar squeezing bound.
    """
    if n_up is None:
        if n_particles % 2:
            raise ValueError("half-filled pattern needs an even particle number")
        n_up = n_particles // 2
    if not 0 <= n_up <= n_particles:
        raise ValueError("excitation count out of range")
    two_j = round(2 * j)
    d = two_j + 1
    layout = Layout(n_particles, d)
    powers = d ** np.arange(n_particles - 1, -1, -1)
    psi = np.zeros(layout.dim, dtype=complex)
    all_down = layout.dim - 1
    for ups in combinations(range(n_particles), n_up):
        index = all_down - (d - 1) * sum(powers[list(ups)])
        psi[index] = 1.0
    return psi / np.sqrt(comb(n_particles, n_up))


def collective_ground_state(cset: CollectiveSet, tol=None):
    """Uniform mixture over the zero eigenspace of sum_k A_k^2.

    Raises when the smallest eigenvalue exceeds `tol` (no zero-variance space
    exists), reporting that eigenvalue.
    """
    tol = config.get("TOL_SINGLET") if tol is None else tol
    h = sum(a @ a for a in cset.collective_ops)
    w, v = herm_eig(h)
    sel = w <= tol
    if not np.any(sel):
        raise ValueError(
            f"no zero eigenspace of the collective square sum: smallest eigenvalue {w[0]:.6g}"
        )
    cols = v[:, sel]
    return cols @ dag(cols) / cols.shape[1]


def sud_singlet(n_particles, d, tol=None):
    """Many-body singlet of the d-level generator algebra: sum_k <G_k^2> = 0.

    Exists when the fully (anti)symmetrized combinations allow it, in
    particular for N = d and N a multiple of d at desk scale.  Degenerate
    ground spaces are returned as their uniform mixture, which is invariant
    under identical local unitaries.
    """
    return collective_ground_state(collectivize(gellmann_set(d), n_particles), tol)


def angular_momentum_singlet(n_particles, j, tol=None):
    """Total-angular-momentum-zero state: uniform mixture over the J=0 space."""
    return collective_ground_state(collectivize(spin_matrices(j), n_particles), tol)


# ---------------------------------------------------------------------------
# mixtures and thermal states
# ---------------------------------------------------------------------------

def white_noise_mix(state, p_noise):
    """(1 - p) rho + p I/D."""
    if not 0 <= p_noise <= 1:
        raise ValueError("noise fraction must lie in [0, 1]")
    rho = density(state)
    dim = rho.shape[0]
    return (1 - p_noise) * rho + p_noise * identity(dim) / dim


def thermal_state(h, temperature):
    """exp(-H/T) / Z, with the spectrum shifted so min(H) = 0 before exponentiation."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    w, v = herm_eig(h)
    weights = np.exp(-(w - w[0]) / temperature)
    weights /= weights.sum()
    rho = (v * weights) @ dag(v)
    return (rho + dag(rho)) / 2


def average_two_particle_state(rho, layout: Layout):
    """Average of all ordered two-site reduced states, (1/N(N-1)) sum_{m!=n} rho_mn."""
    n = layout.n_particles
    if n < 2:
        raise ValueError("need at least two particles")
    rho = density(rho)
    f = flip_operator(layout.local_dim)
    acc = np.zeros((layout.local_dim**2,) * 2, dtype=complex)
    for m, k in combinations(range(n), 2):
        red = partial_trace(rho, (m, k), layout)
        acc += red + f @ red @ f
    return acc / (n * (n - 1))


def permutation_invariant(rho, layout: Layout, tol=None):
    """True when conjugation by every adjacent transposition leaves `rho` unchanged."""
    tol = config.get("TOL_SYMMETRIC") if tol is None else tol
    rho = density(rho)
    scale = max(frob(rho), 1.0)
    for s in range(layout.n_particles - 1):
        swap = transposition_operator(layout, s, s + 1)
        if frob(swap @ rho @ dag(swap) - rho) > tol * scale:
            return False
    return True
