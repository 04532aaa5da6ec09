import math

import numpy as np
import pytest

from conftest import make_random_model
from pseudoe.geometry import GeometryConfig, Signature
from pseudoe.likelihood import TfdParams, sigmoid
from pseudoe.model import InitConfig, score
from pseudoe.relmaps import Variant
from pseudoe.synthetic import tree_clique_graph
from pseudoe.training import (
    AdamOptimizer,
    DivergenceError,
    GradientTape,
    NegativeMode,
    OptimizerKind,
    SgdOptimizer,
    Sm3Optimizer,
    TrainConfig,
    augment_reverse,
    gradients,
    nll_from_scores,
    nll_loss,
    sample_negatives,
    sample_negatives_batch,
    train,
)

from gradcheck import max_gradient_mismatch


def random_batch(params, rng, b=3, m=4):
    batch = np.column_stack(
        [
            rng.integers(0, params.n_entities, b),
            rng.integers(0, params.n_relations, b),
            rng.integers(0, params.n_entities, b),
        ]
    )
    negs = sample_negatives_batch(batch, m, NegativeMode.BOTH, rng, params.n_entities)
    return batch, negs


class TestAugmentReverse:
    def test_empty(self):
        out = augment_reverse(np.empty((0, 3), dtype=np.int64), 5)
        assert out.shape == (0, 3)

    def test_single(self):
        out = augment_reverse(np.array([[0, 0, 1]]), 1)
        np.testing.assert_array_equal(out, [[0, 0, 1], [1, 1, 0]])

    def test_doubles_size(self, rng):
        triples = rng.integers(0, 10, size=(57, 3))
        out = augment_reverse(triples, 10)
        assert out.shape == (114, 3)
        np.testing.assert_array_equal(out[:57], triples)
        np.testing.assert_array_equal(out[57:, 0], triples[:, 2])
        np.testing.assert_array_equal(out[57:, 1], triples[:, 1] + 10)
        np.testing.assert_array_equal(out[57:, 2], triples[:, 0])


class TestSampleNegatives:
    def test_zero(self, rng):
        assert sample_negatives((0, 0, 1), 0, NegativeMode.BOTH, rng, 5) == []

    def test_odd_rejected(self, rng):
        with pytest.raises(ValueError):
            sample_negatives((0, 0, 1), 3, NegativeMode.BOTH, rng, 5)

    def test_structure_both(self, rng):
        negs = sample_negatives((2, 1, 4), 4, NegativeMode.BOTH, rng, 10)
        assert len(negs) == 4
        assert all(k == 1 for _, k, _ in negs)
        # first half corrupts the tail, second half the head
        assert all(h == 2 for h, _, _ in negs[:2])
        assert all(t == 4 for _, _, t in negs[2:])

    def test_structure_tail_only(self, rng):
        negs = sample_negatives((2, 1, 4), 6, NegativeMode.TAIL_ONLY, rng, 10)
        assert all(h == 2 and k == 1 for h, k, _ in negs)

    def test_uniform_over_vocabulary(self):
        rng = np.random.default_rng(99)
        n, draws = 10, 100_000
        batch = np.tile([[0, 0, 1]], (draws // 2, 1))
        negs = sample_negatives_batch(batch, 2, NegativeMode.TAIL_ONLY, rng, n)
        counts = np.bincount(negs[:, :, 2].ravel(), minlength=n)
        expected = draws / n
        sd = math.sqrt(draws * (1 / n) * (1 - 1 / n))
        assert np.all(np.abs(counts - expected) <= 3 * sd)


class TestLoss:
    def test_perfect_fit_limit(self):
        assert nll_from_scores(np.array([np.inf, 1e9]), np.array([-np.inf, -1e9])) == 0.0

    def test_single_positive_at_zero(self):
        params = make_random_model(seed=0, u=0.0)
        params.coords[:] = 0.0
        params.rel_u[:] = 0.0
        params.rel_r[:] = 1.0
        params.node_bias[:] = 0.0
        params.rel_c[:] = 0.0
        loss = nll_loss(params, np.array([[0, 0, 1]]), np.empty((1, 0, 3), dtype=np.int64))
        assert loss == pytest.approx(math.log(2.0), abs=1e-12)

    def test_matches_naive_double_loop(self, rng):
        params = make_random_model(seed=8)
        batch, negs = random_batch(params, rng, b=5, m=4)
        expected = 0.0
        for i in range(batch.shape[0]):
            h, k, t = (int(v) for v in batch[i])
            expected -= math.log(float(sigmoid(score(params, h, k, t))))
            for j in range(negs.shape[1]):
                nh, nk, nt = (int(v) for v in negs[i, j])
                expected -= math.log(1.0 - float(sigmoid(score(params, nh, nk, nt))))
        assert nll_loss(params, batch, negs) == pytest.approx(expected, rel=1e-10)


class TestGradients:
    def test_untouched_parameters_have_zero_gradient(self, rng):
        params = make_random_model(n_entities=8, n_relations=4, seed=3)
        batch = np.array([[0, 0, 1], [1, 1, 2]])
        negs = sample_negatives_batch(batch, 2, NegativeMode.TAIL_ONLY, rng, 4)  # entities 0..3 only
        tape = gradients(params, batch, negs)
        np.testing.assert_array_equal(tape.coords[4:], 0.0)
        np.testing.assert_array_equal(tape.node_bias[4:], 0.0)
        np.testing.assert_array_equal(tape.rel_u[2:], 0.0)
        np.testing.assert_array_equal(tape.rel_c[2:], 0.0)

    def test_relation_bias_gradient_formula(self, rng):
        # d loss / d c_k = sum over triples with relation k of (sigmoid(phi) - label)
        params = make_random_model(seed=4)
        batch, negs = random_batch(params, rng, b=6, m=2)
        tape = gradients(params, batch, negs)
        expected = np.zeros(params.n_relations)
        for i in range(batch.shape[0]):
            h, k, t = (int(v) for v in batch[i])
            expected[k] += float(sigmoid(score(params, h, k, t))) - 1.0
            for j in range(negs.shape[1]):
                nh, nk, nt = (int(v) for v in negs[i, j])
                expected[nk] += float(sigmoid(score(params, nh, nk, nt)))
        np.testing.assert_allclose(tape.rel_c, expected, rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize(
        "variant,n_t,beta,cylinder,swap",
        [
            (Variant.BOTH, 2, 0.3, None, False),
            (Variant.BOTH, 2, 0.3, 3.0, True),
            (Variant.DT, 1, 0.0, None, False),
            (Variant.MT, 3, 1.0, 2.0, False),
        ],
    )
    def test_finite_difference_agreement(self, variant, n_t, beta, cylinder, swap, rng):
        params = make_random_model(
            n_entities=6, n_relations=3, n_t=n_t, n_x=4, variant=variant, beta=beta,
            cylinder=cylinder, seed=10, swap=swap,
        )
        batch, negs = random_batch(params, rng)
        assert max_gradient_mismatch(params, batch, negs) < 1e-5

    def test_nonfinite_score_diagnoses_triple(self):
        params = make_random_model(seed=0)
        params.node_bias[2] = np.inf
        with pytest.raises(DivergenceError, match=r"\(2, 0, 1\)"):
            gradients(params, np.array([[2, 0, 1]]), np.empty((1, 0, 3), dtype=np.int64))


class TestOptimizers:
    def test_sgd_exact_step(self, rng):
        params = make_random_model(seed=6)
        batch, negs = random_batch(params, rng)
        tape = gradients(params, batch, negs)
        before = params.coords.copy()
        SgdOptimizer(params, learning_rate=1.0).step(params, tape)
        np.testing.assert_array_equal(params.coords, before - tape.coords)

    def test_adam_constant_gradient_approaches_lr(self):
        params = make_random_model(seed=6)
        opt = AdamOptimizer(params, learning_rate=0.01)
        tape = GradientTape.zeros_like(params)
        tape.node_bias[:] = 0.37
        tape.touched_entities = np.arange(params.n_entities)
        tape.touched_relations = np.arange(params.n_relations)
        before = params.node_bias.copy()
        for _ in range(50):
            prev = params.node_bias.copy()
            opt.step(params, tape)
        last_step = np.abs(params.node_bias - prev)
        np.testing.assert_allclose(last_step, 0.01, rtol=1e-5)
        assert np.all(params.node_bias < before)

    def test_sm3_accumulators_monotone(self, rng):
        params = make_random_model(seed=6)
        opt = Sm3Optimizer(params, learning_rate=0.1)
        prev_row = opt.coord_row.copy()
        prev_col = opt.coord_col.copy()
        for _ in range(10):
            batch, negs = random_batch(params, rng)
            tape = gradients(params, batch, negs)
            opt.step(params, tape)
            assert np.all(opt.coord_row >= prev_row - 1e-15)
            assert np.all(opt.coord_col >= prev_col - 1e-15)
            prev_row = opt.coord_row.copy()
            prev_col = opt.coord_col.copy()

    @pytest.mark.parametrize("kind", [OptimizerKind.SGD, OptimizerKind.ADAM, OptimizerKind.SM3])
    def test_step_touches_only_batch_parameters(self, kind, rng):
        from pseudoe.training import make_optimizer

        params = make_random_model(n_entities=9, n_relations=4, seed=6)
        opt = make_optimizer(kind, params, 0.5)
        batch = np.array([[0, 0, 1]])
        negs = sample_negatives_batch(batch, 2, NegativeMode.TAIL_ONLY, rng, 3)
        tape = gradients(params, batch, negs)
        untouched_e = np.setdiff1d(np.arange(9), tape.touched_entities)
        untouched_r = np.setdiff1d(np.arange(4), tape.touched_relations)
        coords_before = params.coords[untouched_e].copy()
        bias_before = params.node_bias[untouched_e].copy()
        relc_before = params.rel_c[untouched_r].copy()
        opt.step(params, tape)
        np.testing.assert_array_equal(params.coords[untouched_e], coords_before)
        np.testing.assert_array_equal(params.node_bias[untouched_e], bias_before)
        np.testing.assert_array_equal(params.rel_c[untouched_r], relc_before)


class TestTrainConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(m_negatives=3)
        with pytest.raises(ValueError):
            TrainConfig(m_negatives=0)
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)

    def test_augmentation_forces_tail_only(self):
        assert TrainConfig(augment_reverse=True).negative_mode is NegativeMode.TAIL_ONLY
        assert TrainConfig(augment_reverse=False).negative_mode is NegativeMode.BOTH


@pytest.fixture(scope="module")
def small_graph():
    return tree_clique_graph(n_nodes=20, clique_size=4, seed=1)


class TestTrainLoop:
    def _run(self, store, optimizer, lr, epochs=6, seed=5):
        tfd = TfdParams(tau1=0.5, tau2=0.5, u=0.5, alpha=0.2, alpha_prime=1.0, beta=0.1)
        config = TrainConfig(
            m_negatives=4, batch_size=32, learning_rate=lr, optimizer=optimizer,
            max_epochs=epochs, eval_every=3, patience=10, seed=seed,
        )
        geometry = GeometryConfig(Signature(1, 7))
        return train(store, config, geometry, tfd, Variant.DT, init_cfg=InitConfig(0.1, seed))

    def test_deterministic_log(self, small_graph):
        store, _, _ = small_graph
        _, log_a = self._run(store, OptimizerKind.ADAM, 0.05)
        _, log_b = self._run(store, OptimizerKind.ADAM, 0.05)
        assert [(r.epoch, r.mean_loss, r.val_mrr) for r in log_a] == [
            (r.epoch, r.mean_loss, r.val_mrr) for r in log_b
        ]

    @pytest.mark.parametrize("kind", [OptimizerKind.SGD, OptimizerKind.ADAM, OptimizerKind.SM3])
    def test_loss_decreases_over_first_epochs(self, kind):
        # the overfit graph at each optimizer's preset learning rate
        from pseudoe.experiments import run_overfit

        _, log, _, _ = run_overfit(kind, seed=5, max_epochs=10)
        losses = [r.mean_loss for r in log]
        assert losses[-1] < losses[0]

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence_aborts(self, small_graph):
        store, _, _ = small_graph
        with pytest.raises(DivergenceError):
            self._run(store, OptimizerKind.SGD, 1e12, epochs=30)
