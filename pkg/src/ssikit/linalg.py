"""Dense complex matrix kernel for multi-particle operators.

Operators are plain complex numpy arrays.  A :class:`Layout` fixes how the
total Hilbert space of dimension d**N factors into N sites of local dimension
d; site 0 is the leftmost (most significant) tensor factor, so for two qubits
the basis order is |00>, |01>, |10>, |11>.

All functions are pure: they never mutate their inputs, and outputs are fresh
arrays safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import config


class InvalidStateError(ValueError):
    """A matrix or vector fails the density-matrix / pure-state invariants."""


@dataclass(frozen=True)
class Layout:
    """N particles with d internal levels each; total dimension d**N."""

    n_particles: int
    local_dim: int

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if self.local_dim < 2:
            raise ValueError("local dimension must be at least 2")
        cap = config.get("DIM_CAP")
        if self.local_dim**self.n_particles > cap:
            raise ValueError(
                f"total dimension {self.local_dim}**{self.n_particles} exceeds the "
                f"dimension cap {cap} (override with SSIKIT_DIM_CAP)"
            )

    @property
    def dim(self) -> int:
        return self.local_dim**self.n_particles

    def sites(self):
        return range(self.n_particles)


def dag(a):
    """Conjugate transpose."""
    return np.asarray(a).conj().T


def frob(a):
    """Frobenius norm."""
    return float(np.linalg.norm(a))


def identity(dim):
    return np.eye(dim, dtype=complex)


def kron(a, b):
    """Tensor product a (x) b with the left factor most significant."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim == 2 and (a.shape[0] != a.shape[1] or b.shape[0] != b.shape[1]):
        raise ValueError("kron expects square operators")
    if a.shape[0] * b.shape[0] > config.get("DIM_CAP"):
        raise ValueError("kron result would exceed the dimension cap")
    return np.kron(a, b)


def kron_all(factors):
    """Left-to-right tensor product of a sequence of operators or vectors."""
    factors = list(factors)
    if not factors:
        raise ValueError("kron_all needs at least one factor")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = kron(out, f)
    return out


def embed(op, site, layout: Layout):
    """Place a single-site operator at `site`, identity everywhere else."""
    op = np.asarray(op, dtype=complex)
    d = layout.local_dim
    if op.shape != (d, d):
        raise ValueError(f"operator shape {op.shape} does not match local dimension {d}")
    if not 0 <= site < layout.n_particles:
        raise ValueError(f"site {site} out of range for {layout.n_particles} particles")
    left = identity(d**site)
    right = identity(d ** (layout.n_particles - site - 1))
    return np.kron(np.kron(left, op), right)


def _check_sites(sites, layout):
    sites = sorted(set(int(s) for s in sites))
    if any(s < 0 or s >= layout.n_particles for s in sites):
        raise ValueError(f"sites {sites} out of range for {layout.n_particles} particles")
    return sites


def partial_trace(rho, keep, layout: Layout):
    """Trace out every site not in `keep`; kept sites stay in their original order."""
    keep = _check_sites(keep, layout)
    if not keep:
        raise ValueError("keep set must not be empty")
    n, d = layout.n_particles, layout.local_dim
    rho = np.asarray(rho)
    if rho.shape != (layout.dim, layout.dim):
        raise ValueError("state dimension does not match layout")
    t = rho.reshape([d] * (2 * n))
    row = list(range(n))
    col = [n + s if s in keep else s for s in range(n)]
    out = [s for s in keep] + [n + s for s in keep]
    red = np.einsum(t, row + col, out)
    dk = d ** len(keep)
    return red.reshape(dk, dk)


def partial_transpose(rho, sites, layout: Layout):
    """Transpose the indices of the given sites only."""
    sites = _check_sites(sites, layout)
    n, d = layout.n_particles, layout.local_dim
    rho = np.asarray(rho)
    if rho.shape != (layout.dim, layout.dim):
        raise ValueError("state dimension does not match layout")
    perm = list(range(2 * n))
    for s in sites:
        perm[s], perm[n + s] = perm[n + s], perm[s]
    return rho.reshape([d] * (2 * n)).transpose(perm).reshape(layout.dim, layout.dim)


def is_hermitian(a, tol=None):
    a = np.asarray(a)
    tol = config.get("TOL_HERM") if tol is None else tol
    scale = frob(a)
    return frob(a - dag(a)) <= tol * max(scale, 1.0)


def herm_eig(a, check=True):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, orthonormal eigenvector columns).
    """
    a = np.asarray(a)
    if check and not is_hermitian(a):
        raise ValueError("herm_eig expects a Hermitian matrix")
    w, v = np.linalg.eigh(a)
    return w, v


def matrix_exp_herm(a, scale=1.0):
    """exp(scale * a) for Hermitian a, via eigendecomposition."""
    w, v = herm_eig(a)
    out = (v * np.exp(scale * w)) @ dag(v)
    return (out + dag(out)) / 2


def herm_unitary(h, angle=1.0):
    """exp(-1j * angle * h) for Hermitian h."""
    w, v = herm_eig(h)
    return (v * np.exp(-1j * angle * w)) @ dag(v)


def expectation(state, op):
    """<op> on a pure state (1-D amplitudes) or density matrix (2-D)."""
    state = np.asarray(state)
    op = np.asarray(op)
    if state.ndim == 1:
        if op.shape != (state.shape[0], state.shape[0]):
            raise ValueError("operator and state dimensions do not match")
        val = complex(np.vdot(state, op @ state))
    elif state.ndim == 2:
        if op.shape != state.shape:
            raise ValueError("operator and state dimensions do not match")
        val = complex(np.einsum("ij,ji->", state, op))
    else:
        raise ValueError("state must be a vector or a matrix")
    if abs(val.imag) > config.get("TOL_HERM") * max(1.0, abs(val)):
        raise ValueError(f"expectation value has a non-negligible imaginary part {val.imag:g}")
    return val.real


def check_density_matrix(rho, layout: Layout | None = None):
    """Return a list of invariant violations (empty when `rho` is a valid state)."""
    rho = np.asarray(rho)
    problems = []
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return ["not a square matrix"]
    if layout is not None and rho.shape[0] != layout.dim:
        problems.append(f"dimension {rho.shape[0]} does not match layout dimension {layout.dim}")
    if not np.all(np.isfinite(rho.real)) or not np.all(np.isfinite(rho.imag)):
        return problems + ["entries are not finite"]
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > config.get("TOL_TRACE"):
        problems.append(f"trace {tr:.12g} differs from 1")
    if not is_hermitian(rho):
        problems.append("not Hermitian")
    else:
        w = np.linalg.eigvalsh((rho + dag(rho)) / 2)
        if w[0] < -config.get("TOL_PSD"):
            problems.append(f"negative eigenvalue {w[0]:.3g}")
    return problems


def assert_density_matrix(rho, layout: Layout | None = None):
    problems = check_density_matrix(rho, layout)
    if problems:
        raise InvalidStateError("invalid density matrix: " + "; ".join(problems))


def check_pure_state(psi, layout: Layout | None = None):
    psi = np.asarray(psi)
    problems = []
    if psi.ndim != 1:
        return ["not a vector"]
    if layout is not None and psi.shape[0] != layout.dim:
        problems.append(f"dimension {psi.shape[0]} does not match layout dimension {layout.dim}")
    if not np.all(np.isfinite(psi.real)) or not np.all(np.isfinite(psi.imag)):
        return problems + ["entries are not finite"]
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > 1e2 * config.get("TOL_TRACE"):
        problems.append(f"norm {norm:.12g} differs from 1")
    return problems


def assert_pure_state(psi, layout: Layout | None = None):
    problems = check_pure_state(psi, layout)
    if problems:
        raise InvalidStateError("invalid pure state: " + "; ".join(problems))


# ---------------------------------------------------------------------------
# deterministic randomness
# ---------------------------------------------------------------------------

def make_rng(seed):
    """Counter-based 64-bit generator (Philox) so runs are reproducible by seed."""
    return np.random.Generator(np.random.Philox(seed))


def random_unitary(dim, rng):
    """Haar-distributed unitary (QR of a complex Gaussian with phase fixing)."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r).copy()
    ph /= np.abs(ph)
    return q * ph


def random_orthogonal(dim, rng):
    """Haar-distributed real orthogonal matrix."""
    z = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * np.sign(np.diagonal(r))
