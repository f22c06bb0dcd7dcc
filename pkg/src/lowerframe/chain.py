"""Nested tail spans, gap vectors, and the interleaved canonical basis.

For a family ``v_1, v_2, ...`` the tail spans ``H_n = span{v_k : k >= n}``
decrease in ``n`` and lose at most one dimension per step. A unit vector in
``H_n ∩ H_{n+1}^⊥`` (the gap vector ``x_n``) is recorded at every drop; an
orthonormal basis ``y`` of the common core ``H_∞`` covers the rest. The
canonical basis interleaves them as ``u_{2n-1} = x_n``, ``u_{2n} = y_n``,
using zero vectors where nothing is defined.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InconsistencyError, TotalityError
from .linalg import DEFAULT_RANK_TOL, complement_within, orthonormal_basis

NESTING_TOL = 1e-8
GRAM_TOL = 1e-9


@dataclass(frozen=True)
class TailSpanChain:
    """Orthonormal bases ``B_1..B_{M+1}`` of the tail spans plus the core.

    ``bases[n - 1]`` spans ``H_n``. The chain is constant past ``M + 1``.
    """

    bases: tuple
    core: np.ndarray
    tail_mode: str

    @property
    def length(self):
        """Chain length ``M`` (number of gap slots)."""
        return len(self.bases) - 1

    @property
    def dim(self):
        return self.bases[0].shape[0]

    @property
    def ranks(self):
        return tuple(B.shape[1] for B in self.bases)

    @property
    def drops(self):
        r = self.ranks
        return tuple(r[i] - r[i + 1] for i in range(len(r) - 1))

    def basis(self, n):
        """Basis of ``H_n`` (1-based; constant beyond the stored range)."""
        return self.bases[min(n, len(self.bases)) - 1]


@dataclass(frozen=True)
class CanonicalBasis:
    """Rows ``u_1..u_{2M}``; zero rows stand for undefined slots."""

    vectors: np.ndarray

    def __len__(self):
        return self.vectors.shape[0]

    @property
    def nonzero(self):
        return np.any(self.vectors != 0, axis=1)

    @property
    def gap_vectors(self):
        """``x_1..x_M`` (odd slots)."""
        return self.vectors[0::2]

    @property
    def core_vectors(self):
        """``y_1..y_M`` (even slots)."""
        return self.vectors[1::2]

    def gram_deviation(self):
        U = self.vectors[self.nonzero]
        if U.shape[0] == 0:
            return 0.0
        G = U.conj() @ U.T
        return float(np.abs(G - np.eye(U.shape[0])).max())


def _tail_window(family, n):
    """Vectors that span ``H_n`` as columns."""
    N = family.count
    if family.tail_mode == "zero":
        return family.columns(n, N)
    return family.columns(n, n + N - 1)


def compute_tail_chain(family, rank_tol=DEFAULT_RANK_TOL):
    """Orthonormal bases of every tail span of ``family``.

    Zero tail: ``M = N`` and ``H_{N+1} = {0}``, so the core is empty.
    Cyclic tail: every window of ``N`` consecutive indices spans the whole
    space, ``M = N`` and the core equals ``H_1``.

    Raises
    ------
    TotalityError
        If ``H_1`` is not the whole space at ``rank_tol``.
    InconsistencyError
        If a step loses more than one dimension or nesting fails.
    """
    d, N = family.dim, family.count
    bases = [None] * (N + 1)
    bases[N] = (
        np.zeros((d, 0), dtype=complex)
        if family.tail_mode == "zero"
        else orthonormal_basis(_tail_window(family, N + 1), rank_tol)
    )
    for n in range(N, 0, -1):
        bases[n - 1] = orthonormal_basis(_tail_window(family, n), rank_tol, dim=d)

    if bases[0].shape[1] != d:
        raise TotalityError(bases[0].shape[1], d)

    for n in range(1, N + 1):
        big, small = bases[n - 1], bases[n]
        drop = big.shape[1] - small.shape[1]
        if drop not in (0, 1):
            raise InconsistencyError(
                f"tail span drops {drop} dimensions between H_{n} and H_{n + 1}"
            )
        if small.shape[1]:
            leak = small - big @ (big.conj().T @ small)
            worst = float(np.abs(leak).max())
            if worst > NESTING_TOL:
                raise InconsistencyError(f"H_{n + 1} is not inside H_{n} (residual {worst:.3e})")

    core = bases[0] if family.tail_mode == "cyclic" else bases[N]
    for B in bases:
        B.setflags(write=False)
    return TailSpanChain(bases=tuple(bases), core=core, tail_mode=family.tail_mode)


def build_canonical_basis(chain, tol=NESTING_TOL):
    """Interleave gap vectors and core vectors into ``u_1..u_{2M}``.

    Each nonzero gap vector is the phase-normalized unit vector of
    ``H_n ∩ H_{n+1}^⊥``; each core slot takes the next column of the core
    basis or zero once it runs out.
    """
    M, d = chain.length, chain.dim
    core = chain.core
    if core.shape[1] > M:
        raise InconsistencyError(f"core of rank {core.shape[1]} does not fit in {M} slots")
    U = np.zeros((2 * M, d), dtype=complex)
    for n in range(1, M + 1):
        big, small = chain.bases[n - 1], chain.bases[n]
        drop = big.shape[1] - small.shape[1]
        if drop not in (0, 1):
            raise InconsistencyError(f"chain drops {drop} dimensions at step {n}")
        if drop == 1:
            U[2 * n - 2] = complement_within(big, small, tol)[:, 0]
        if n <= core.shape[1]:
            U[2 * n - 1] = core[:, n - 1]

    basis = CanonicalBasis(U)
    count = int(np.count_nonzero(basis.nonzero))
    if count != d:
        raise InconsistencyError(f"canonical basis has {count} nonzero vectors, expected {d}")
    dev = basis.gram_deviation()
    if dev > GRAM_TOL:
        raise InconsistencyError(f"canonical basis is not orthonormal (Gram deviation {dev:.3e})")
    U.setflags(write=False)
    return basis


def membership_residuals(chain, basis):
    """``||(I - P_{H_⌈n/2⌉}) u_n||`` for every slot (0 for zero slots)."""
    out = np.zeros(len(basis))
    for i, u in enumerate(basis.vectors):
        if not np.any(u):
            continue
        B = chain.basis((i + 2) // 2)
        out[i] = np.linalg.norm(u - B @ (B.conj().T @ u))
    return out


def nesting_residuals(chain):
    """``||B_{n+1} - B_n (B_n^* B_{n+1})||`` for ``n = 1..M``."""
    out = np.zeros(chain.length)
    for n in range(chain.length):
        big, small = chain.bases[n], chain.bases[n + 1]
        if small.shape[1]:
            out[n] = np.linalg.norm(small - big @ (big.conj().T @ small), 2)
    return out
