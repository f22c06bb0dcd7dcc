import numpy as np
import pytest

from lowerframe.chain import (
    CanonicalBasis,
    build_canonical_basis,
    compute_tail_chain,
    membership_residuals,
    nesting_residuals,
)
from lowerframe.exceptions import InconsistencyError, TotalityError
from lowerframe.family import GENERATOR_KINDS, GeneratorSpec, VectorFamily, generate_family

from conftest import random_family
from oracles import rank

SQ2 = np.sqrt(2)


def _suffix_ranks(family):
    """Oracle: rank of each raw suffix matrix, no orthonormalization."""
    V = family.vectors
    return tuple(rank(V[n:].T) if n < len(V) else 0 for n in range(len(V) + 1))


class TestTailChain:
    def test_orthonormal(self):
        f = generate_family(GeneratorSpec("orthonormal", 3))
        chain = compute_tail_chain(f)
        assert chain.ranks == (3, 2, 1, 0) == _suffix_ranks(f)
        assert chain.core.shape == (3, 0)

    def test_shifted_sum(self):
        f = generate_family(GeneratorSpec("shifted_sum", 3))
        chain = compute_tail_chain(f)
        assert chain.ranks == (3, 2, 1, 0)
        # H_n = span{e_n..e_3}: projector onto basis equals coordinate projector
        for n in range(1, 4):
            B = chain.basis(n)
            P = np.diag([0.0] * (n - 1) + [1.0] * (4 - n))
            np.testing.assert_allclose(B @ B.conj().T, P, atol=1e-12)

    def test_cyclic(self):
        f = generate_family(GeneratorSpec("cyclic_spanning", 2, 3))
        chain = compute_tail_chain(f)
        assert set(chain.ranks) == {2}
        assert chain.core.shape == (2, 2)
        assert chain.length == 3

    def test_not_total(self):
        f = VectorFamily([[1, 0, 0], [0, 1, 0]])
        with pytest.raises(TotalityError) as err:
            compute_tail_chain(f)
        assert err.value.rank == 2

    @pytest.mark.parametrize("seed", range(5))
    def test_random_matches_oracle(self, seed):
        f = random_family(seed, 4, 7)
        chain = compute_tail_chain(f)
        assert chain.ranks == _suffix_ranks(f)
        assert max(nesting_residuals(chain)) <= 1e-8
        assert sum(chain.drops) + chain.core.shape[1] == f.dim


class TestCanonicalBasis:
    def test_orthonormal(self):
        f = generate_family(GeneratorSpec("orthonormal", 2))
        u = build_canonical_basis(compute_tail_chain(f))
        np.testing.assert_allclose(u.vectors, [[1, 0], [0, 0], [0, 1], [0, 0]], atol=1e-14)

    def test_two_vector(self, two_vector):
        u = build_canonical_basis(compute_tail_chain(two_vector))
        # hand computation: H_2 = span{(1,1)}, x_1 spans its complement
        np.testing.assert_allclose(u.vectors[0], np.array([1, -1]) / SQ2, atol=1e-14)
        np.testing.assert_allclose(u.vectors[2], np.array([1, 1]) / SQ2, atol=1e-14)
        assert not np.any(u.vectors[1]) and not np.any(u.vectors[3])

    def test_cyclic_all_gaps_zero(self):
        f = generate_family(GeneratorSpec("cyclic_spanning", 2, 3))
        u = build_canonical_basis(compute_tail_chain(f))
        assert not np.any(u.gap_vectors)
        Y = u.vectors[[1, 3]]
        np.testing.assert_allclose(Y.conj() @ Y.T, np.eye(2), atol=1e-12)

    @pytest.mark.parametrize("kind", GENERATOR_KINDS)
    @pytest.mark.parametrize("d", [1, 3, 6])
    def test_invariants(self, kind, d):
        f = generate_family(GeneratorSpec(kind, d))
        chain = compute_tail_chain(f)
        u = build_canonical_basis(chain)
        assert len(u) == 2 * chain.length
        assert int(u.nonzero.sum()) == d
        assert u.gram_deviation() <= 1e-9
        assert membership_residuals(chain, u).max() <= 1e-8
        # gap vectors: orthogonal to the next tail span
        for n in range(1, chain.length + 1):
            x = u.vectors[2 * n - 2]
            if np.any(x):
                B = chain.bases[n]
                assert np.linalg.norm(B.conj().T @ x) <= 1e-10

    def test_gram_deviation_detects_duplicate(self):
        U = np.array([[1.0, 0.0], [1.0, 0.0]], dtype=complex)
        assert CanonicalBasis(U).gram_deviation() >= 1

    def test_deterministic(self):
        f = random_family(3, 5, 5)
        a = build_canonical_basis(compute_tail_chain(f))
        b = build_canonical_basis(compute_tail_chain(f))
        assert a.vectors.tobytes() == b.vectors.tobytes()

    def test_bad_drop_rejected(self):
        good = compute_tail_chain(generate_family(GeneratorSpec("orthonormal", 2)))
        bad = type(good)(bases=(good.bases[0], good.bases[2], good.bases[2]), core=good.core, tail_mode="zero")
        with pytest.raises(InconsistencyError):
            build_canonical_basis(bad)
