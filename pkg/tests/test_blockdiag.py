import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import rpolar as rp
from rpolar.errors import NotLambdaSquare, NotSymmetricSquare
from util import random_symmetric_square, random_trace_zero_block

RNG = np.random.default_rng(77)

WORKED_Y = np.array(
    [[1, 0, 1, 1], [0, 1, 1, 1], [0, 0, -1, 0], [0, 0, 0, -1]], dtype=float
)


def check_decomposition(dec, x, tol=1e-8):
    n = x.shape[0]
    scale = 1.0 + rp.frob_norm(x)
    assert sum(b.size for b in dec.blocks) == n
    assert rp.frob_norm(dec.basis.T @ dec.basis - np.eye(n)) <= 1e-10
    assert dec.reconstruction_residual(x) <= tol * scale
    for b in dec.blocks:
        assert b.size in (1, 2)
        assert b.square_residual() <= tol * (1.0 + rp.frob_norm_sq(x))
    total = sum(rp.frob_norm_sq(b.entries) for b in dec.blocks)
    assert total == pytest.approx(rp.frob_norm_sq(x), rel=1e-8)


class TestIsSymmetricSquare:
    def test_symmetric_input(self):
        s = rp.sym(RNG.standard_normal((4, 4)))
        assert rp.is_symmetric_square(s)

    def test_trace_zero_2x2(self):
        x = np.array([[1.5, 2.0], [0.75, -1.5]])
        assert rp.is_symmetric_square(x)

    def test_counterexample(self):
        x = np.array([[1.0, 1.0], [0.0, 2.0]])
        # direct oracle: skew(X^2) has off-diagonal (3 - 0)/2
        assert rp.frob_norm(rp.skew(x @ x)) > 1.0
        assert not rp.is_symmetric_square(x)

    @settings(max_examples=25)
    @given(arrays(float, (3, 3), elements=st.floats(-5, 5, allow_nan=False)))
    def test_any_symmetric_matrix_passes(self, raw):
        assert rp.is_symmetric_square(rp.sym(raw))


class TestEigsplit:
    def test_identity_single_cluster(self):
        clusters = rp.eigsplit_symmetric(np.eye(3))
        assert len(clusters) == 1
        lam, basis = clusters[0]
        assert lam == pytest.approx(1.0)
        assert basis.shape == (3, 3)

    def test_exact_repeats(self):
        clusters = rp.eigsplit_symmetric(np.diag([4.0, 4.0, 1.0]))
        assert [(round(lam, 12), b.shape[1]) for lam, b in clusters] == [(4.0, 2), (1.0, 1)]

    def test_worked_square_is_identity(self):
        s = WORKED_Y @ WORKED_Y
        np.testing.assert_allclose(s, np.eye(4), atol=1e-14)
        clusters = rp.eigsplit_symmetric(s)
        assert len(clusters) == 1
        assert clusters[0][1].shape == (4, 4)

    def test_bases_orthonormal_and_spanning(self):
        s = rp.sym(RNG.standard_normal((6, 6)))
        clusters = rp.eigsplit_symmetric(s)
        full = np.hstack([b for _, b in clusters])
        assert full.shape == (6, 6)
        np.testing.assert_allclose(full.T @ full, np.eye(6), atol=1e-12)


class TestScalarSquareBlocks:
    def test_identity_splits_to_singletons(self):
        dec = rp.scalar_square_blocks(np.eye(3), 1.0)
        assert [b.size for b in dec.blocks] == [1, 1, 1]
        np.testing.assert_allclose(dec.block_diagonal(), np.eye(3), atol=1e-14)

    def test_quarter_turn_is_irreducible(self):
        y = np.array([[0.0, -1.0], [1.0, 0.0]])
        dec = rp.scalar_square_blocks(y, -1.0)
        assert [b.size for b in dec.blocks] == [2]
        assert dec.blocks[0].mu == pytest.approx(-1.0)

    def test_worked_4x4_split(self):
        dec = rp.scalar_square_blocks(WORKED_Y, 1.0)
        check_decomposition(dec, WORKED_Y)
        norms = sorted(rp.frob_norm_sq(b.entries) for b in dec.blocks)
        # one genuinely two-dimensional piece of norm^2 6, the rest norm^2 2
        assert norms[-1] == pytest.approx(6.0, abs=1e-12)
        assert sum(norms) == pytest.approx(8.0, abs=1e-12)

    def test_precondition_checked(self):
        with pytest.raises(NotLambdaSquare):
            rp.scalar_square_blocks(np.diag([1.0, 2.0]), 1.0)

    def test_negative_lambda_blocks(self):
        rng = np.random.default_rng(5)
        b1 = random_trace_zero_block(rng, -2.5)
        b2 = random_trace_zero_block(rng, -2.5)
        y = np.zeros((4, 4))
        y[:2, :2], y[2:, 2:] = b1, b2
        t0 = rp.random_rotation(4, rng)
        x = t0 @ y @ t0.T
        dec = rp.scalar_square_blocks(x, -2.5)
        assert [b.size for b in dec.blocks] == [2, 2]
        check_decomposition(dec, x)


class TestBlockDiagonalize:
    def test_symmetric_gives_singletons(self):
        s = rp.sym(RNG.standard_normal((5, 5)))
        dec = rp.block_diagonalize(s)
        assert all(b.size == 1 for b in dec.blocks)
        check_decomposition(dec, s)
        # the basis columns are then eigenvectors of s
        d = dec.basis.T @ s @ dec.basis
        assert rp.frob_norm(d - np.diag(np.diag(d))) <= 1e-8 * (1 + rp.frob_norm(s))

    def test_worked_4x4(self):
        dec = rp.block_diagonalize(WORKED_Y)
        check_decomposition(dec, WORKED_Y)
        assert all(b.mu == pytest.approx(1.0, abs=1e-12) for b in dec.blocks)
        total = sum(rp.frob_norm_sq(b.entries) for b in dec.blocks)
        assert total == pytest.approx(8.0, abs=1e-12)

    def test_rejects_non_symmetric_square(self):
        with pytest.raises(NotSymmetricSquare):
            rp.block_diagonalize(np.array([[1.0, 1.0], [0.0, 2.0]]))

    def test_synthesize_then_decompose(self):
        rng = np.random.default_rng(123)
        x, blocks = random_symmetric_square(rng, 6)
        dec = rp.block_diagonalize(x)
        check_decomposition(dec, x)
        # mu values, weighted by block size, are the eigenvalues of X^2
        # with multiplicity, so the multisets must agree even though the
        # block sizes themselves may differ from the synthesis.
        def mu_of(b):
            if b.shape[0] == 1:
                return float(b[0, 0] ** 2)
            return float(b[0, 0] ** 2 + b[0, 1] * b[1, 0])

        synth = sorted(mu_of(b) for b in blocks for _ in range(b.shape[0]))
        got = sorted(b.mu for b in dec.blocks for _ in range(b.size))
        np.testing.assert_allclose(got, synth, atol=1e-8)

    def test_fuzz_small(self):
        rng = np.random.default_rng(2024)
        for n in range(2, 9):
            for _ in range(60):
                x, _ = random_symmetric_square(rng, n)
                check_decomposition(rp.block_diagonalize(x), x)

    def test_block_ordering_deterministic(self):
        x, _ = random_symmetric_square(np.random.default_rng(9), 5)
        a = rp.block_diagonalize(x)
        b = rp.block_diagonalize(x)
        np.testing.assert_array_equal(a.basis, b.basis)
        mus = [blk.mu for blk in a.blocks]
        assert mus == sorted(mus, reverse=True)
