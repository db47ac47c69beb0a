import math

import numpy as np
import pytest

from evcap.align import (
    AlignConfig,
    LossBreakdown,
    TokenSeq,
    ToyDecoderParams,
    ToyEncoderParams,
    batch_loss_and_grad,
    cosine_alignment_loss,
    cosine_loss_evaluator,
    encode,
    frame_to_input,
    fuse_embeddings,
    grad_check,
    gradient_descent,
    init_toy_model,
    load_checkpoint,
    nll_evaluator,
    prior_fused_nll,
    save_checkpoint,
    sequence_nll,
    synthetic_alignment_dataset,
    total_loss,
    total_loss_evaluator,
    train_toy,
    trainable_vector,
    with_trainable_vector,
    write_loss_csv,
)
from evcap.errors import DegenerateInputError, DimensionError
from evcap.events import RgbFrame


def frame_from(values) -> RgbFrame:
    return RgbFrame(np.asarray(values, dtype=np.uint8))


class TestEncode:
    def test_zero_params_give_zero_embedding(self, rng):
        frame = frame_from(rng.integers(0, 256, size=(2, 2, 3)))
        params = ToyEncoderParams(np.zeros((3, 12)), np.zeros(3), normalize=True)
        out = encode([frame], params)
        assert np.array_equal(out[0], np.zeros(3))

    def test_identical_frames_identical_embeddings(self, rng):
        frame = frame_from(rng.integers(0, 256, size=(2, 2, 3)))
        params = ToyEncoderParams(rng.standard_normal((3, 12)), rng.standard_normal(3))
        a, b = encode([frame, frame], params)
        assert np.array_equal(a, b)

    def test_matches_hand_matrix_arithmetic(self, rng):
        frame = frame_from(rng.integers(0, 256, size=(2, 2, 3)))
        proj = rng.standard_normal((3, 12))
        bias = rng.standard_normal(3)
        params = ToyEncoderParams(proj, bias, normalize=False)
        out = encode([frame], params)[0]
        # oracle: explicit matvec + tanh
        u = frame.pixels.astype(np.float64).ravel() / 255.0
        expected = [math.tanh(sum(proj[r, c] * u[c] for c in range(12)) + bias[r]) for r in range(3)]
        assert np.allclose(out, expected, atol=1e-15)

    def test_normalization_yields_unit_vectors(self, rng):
        frame = frame_from(rng.integers(0, 256, size=(2, 2, 3)))
        params = ToyEncoderParams(rng.standard_normal((5, 12)), rng.standard_normal(5))
        out = encode([frame], params)[0]
        assert abs(np.linalg.norm(out) - 1.0) < 1e-12

    def test_dimension_mismatch_rejected(self, rng):
        frame = frame_from(rng.integers(0, 256, size=(3, 3, 3)))
        params = ToyEncoderParams(np.zeros((3, 12)), np.zeros(3))
        with pytest.raises(DimensionError):
            encode([frame], params)


class TestCosineLoss:
    def test_equal_embeddings_give_zero(self, rng):
        vs = [rng.standard_normal(4) for _ in range(3)]
        assert cosine_alignment_loss(vs, vs) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_concatenations_give_one(self):
        ev = [np.array([1.0, 0.0])]
        im = [np.array([0.0, 1.0])]
        assert cosine_alignment_loss(ev, im) == pytest.approx(1.0, abs=1e-15)

    def test_opposite_embeddings_give_two(self, rng):
        vs = [rng.standard_normal(4) for _ in range(2)]
        neg = [-v for v in vs]
        assert cosine_alignment_loss(vs, neg) == pytest.approx(2.0, abs=1e-12)

    def test_range_symmetry_and_scale_invariance(self):
        for seed in range(30):
            gen = np.random.default_rng(seed)
            ev = [gen.standard_normal(5) for _ in range(3)]
            im = [gen.standard_normal(5) for _ in range(3)]
            loss = cosine_alignment_loss(ev, im)
            assert 0.0 <= loss <= 2.0
            assert cosine_alignment_loss(im, ev) == pytest.approx(loss, abs=1e-12)
            a, b = float(gen.uniform(0.1, 9)), float(gen.uniform(0.1, 9))
            scaled = cosine_alignment_loss([a * v for v in ev], [b * v for v in im])
            assert scaled == pytest.approx(loss, abs=1e-9)

    def test_per_pair_mean_mode(self):
        ev = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        im = [np.array([1.0, 0.0]), np.array([0.0, -1.0])]
        # pairs: cos=1 and cos=-1 -> losses 0 and 2 -> mean 1
        assert cosine_alignment_loss(ev, im, "per_pair_mean") == pytest.approx(1.0)

    def test_zero_vector_is_degenerate(self):
        with pytest.raises(DegenerateInputError):
            cosine_alignment_loss([np.zeros(3)], [np.ones(3)])

    def test_length_mismatch_rejected(self):
        with pytest.raises(DimensionError):
            cosine_alignment_loss([np.ones(3)], [np.ones(3), np.ones(3)])


def uniform_decoder(vocab: int, dim: int) -> ToyDecoderParams:
    return ToyDecoderParams(np.zeros((vocab, dim)), np.zeros((vocab, 2 * dim)))


class TestSequenceNll:
    def test_uniform_decoder_is_L_ln_V(self):
        decoder = uniform_decoder(10, 4)
        seq = TokenSeq((), (3, 7, 1))
        loss = sequence_nll(decoder, np.zeros(4), seq)
        assert loss == pytest.approx(3 * math.log(10), abs=1e-12)

    def test_high_margin_logits_drive_loss_to_zero(self):
        vocab, dim = 8, 2
        emb = np.zeros((vocab, dim))
        out = np.zeros((vocab, 2 * dim))
        out[3, 0] = 50.0  # logits[3] = 50 * conditioning[0], others 0
        decoder = ToyDecoderParams(emb, out)
        loss = sequence_nll(decoder, np.array([1.0, 0.0]), TokenSeq((), (3, 3)))
        assert loss <= 1e-6

    def test_matches_per_step_softmax_oracle(self, rng):
        vocab, dim = 4, 2
        emb = rng.standard_normal((vocab, dim))
        out = rng.standard_normal((vocab, 2 * dim))
        decoder = ToyDecoderParams(emb, out)
        c = rng.standard_normal(dim)
        seq = TokenSeq((), (2, 1))
        # oracle: explicit softmax accumulation with scalar loops
        expected = 0.0
        prev = 0
        for target in seq.answer:
            g = list(c) + list(emb[prev])
            logits = [sum(out[v][k] * g[k] for k in range(2 * dim)) for v in range(vocab)]
            z = sum(math.exp(l) for l in logits)
            expected += -math.log(math.exp(logits[target]) / z)
            prev = target
        assert sequence_nll(decoder, c, seq) == pytest.approx(expected, rel=1e-12)

    def test_instruction_tokens_shift_conditioning(self, rng):
        vocab, dim = 5, 3
        decoder = ToyDecoderParams(rng.standard_normal((vocab, dim)), rng.standard_normal((vocab, 2 * dim)))
        c = rng.standard_normal(dim)
        with_instruction = sequence_nll(decoder, c, TokenSeq((2, 4), (1,)))
        folded = sequence_nll(decoder, c + decoder.token_embed[2] + decoder.token_embed[4], TokenSeq((), (1,)))
        assert with_instruction == pytest.approx(folded, rel=1e-12)

    def test_token_out_of_vocab_rejected(self):
        decoder = uniform_decoder(4, 2)
        with pytest.raises(DimensionError):
            sequence_nll(decoder, np.zeros(2), TokenSeq((), (4,)))

    def test_nonnegative(self, rng):
        decoder = ToyDecoderParams(rng.standard_normal((6, 3)), rng.standard_normal((6, 6)))
        for seed in range(10):
            gen = np.random.default_rng(seed)
            seq = TokenSeq((), tuple(int(t) for t in gen.integers(0, 6, size=4)))
            assert sequence_nll(decoder, gen.standard_normal(3), seq) >= 0.0


class TestPriorFusedNll:
    def test_same_embedding_reduces_to_sequence_nll(self, rng):
        decoder = ToyDecoderParams(rng.standard_normal((5, 3)), rng.standard_normal((5, 6)))
        v = rng.standard_normal(3)
        seq = TokenSeq((1,), (2, 3))
        assert prior_fused_nll(decoder, v, v, seq) == sequence_nll(decoder, v, seq)

    def test_opposite_embeddings_give_zero_conditioning(self, rng):
        decoder = ToyDecoderParams(rng.standard_normal((5, 3)), rng.standard_normal((5, 6)))
        v = rng.standard_normal(3)
        seq = TokenSeq((), (1, 4))
        assert prior_fused_nll(decoder, v, -v, seq) == sequence_nll(decoder, np.zeros(3), seq)

    def test_average_then_evaluate_oracle(self, rng):
        decoder = ToyDecoderParams(rng.standard_normal((5, 3)), rng.standard_normal((5, 6)))
        ev, im = rng.standard_normal(3), rng.standard_normal(3)
        seq = TokenSeq((0,), (3,))
        hand_avg = 0.5 * (ev + im)
        assert prior_fused_nll(decoder, ev, im, seq) == sequence_nll(decoder, hand_avg, seq)

    def test_dimension_mismatch(self, rng):
        decoder = uniform_decoder(4, 2)
        with pytest.raises(DimensionError):
            prior_fused_nll(decoder, np.zeros(2), np.zeros(3), TokenSeq((), (1,)))


class TestTotalLoss:
    def test_composition_with_equal_terms(self, rng):
        # identical ev/im embeddings: both NLL terms coincide and cosine is 0
        decoder = ToyDecoderParams(rng.standard_normal((5, 3)), rng.standard_normal((5, 6)))
        vs = [rng.standard_normal(3) for _ in range(2)]
        b = total_loss(decoder, vs, vs, TokenSeq((), (2,)), AlignConfig())
        assert b.l_ev_t == pytest.approx(b.l_ev_im_t, rel=1e-12)
        assert b.l_c == pytest.approx(0.0, abs=1e-12)
        assert b.total == pytest.approx(b.l_ev_t, rel=1e-12)

    def test_lambda2_zero_drops_cosine(self, rng):
        decoder = ToyDecoderParams(rng.standard_normal((5, 3)), rng.standard_normal((5, 6)))
        ev = [rng.standard_normal(3)]
        im = [rng.standard_normal(3)]
        b = total_loss(decoder, ev, im, TokenSeq((), (1, 2)), AlignConfig(lambda2=0.0))
        assert b.total == pytest.approx(0.5 * (b.l_ev_t + b.l_ev_im_t), rel=1e-12)

    def test_default_weights_are_one(self):
        cfg = AlignConfig()
        assert cfg.lambda1 == 1.0 and cfg.lambda2 == 1.0

    def test_recomposition_identity_for_random_weights(self, rng):
        decoder = ToyDecoderParams(rng.standard_normal((5, 3)), rng.standard_normal((5, 6)))
        ev = [rng.standard_normal(3) for _ in range(2)]
        im = [rng.standard_normal(3) for _ in range(2)]
        seq = TokenSeq((1,), (2, 3))
        for seed in range(20):
            gen = np.random.default_rng(seed)
            l1, l2 = float(gen.uniform(0, 3)), float(gen.uniform(0, 3))
            b = total_loss(decoder, ev, im, seq, AlignConfig(lambda1=l1, lambda2=l2))
            assert b.total == 0.5 * l1 * (b.l_ev_t + b.l_ev_im_t) + l2 * b.l_c


class TestFuse:
    def test_mean_of_identical_is_identity(self, rng):
        v = rng.standard_normal(4)
        assert np.allclose(fuse_embeddings(v, v, "mean"), v)

    def test_opposites_cancel(self, rng):
        v = rng.standard_normal(4)
        assert np.allclose(fuse_embeddings(v, -v, "sum"), 0)
        assert np.allclose(fuse_embeddings(v, -v, "mean"), 0)

    def test_sum_is_elementwise(self):
        a, b = np.array([1.0, 2.0]), np.array([10.0, 20.0])
        assert np.array_equal(fuse_embeddings(a, b, "sum"), np.array([11.0, 22.0]))

    def test_default_is_mean(self):
        a, b = np.array([2.0]), np.array([4.0])
        assert fuse_embeddings(a, b)[0] == 3.0


class TestGradCheck:
    def test_quadratic_is_exact(self):
        err = grad_check(lambda v: (float(v[0] ** 2), 2.0 * v), np.array([3.0]), 1e-5)
        assert err <= 1e-9

    def test_cosine_gradients(self, rng):
        for mode in ("flatten", "per_pair_mean"):
            err = grad_check(cosine_loss_evaluator(3, 6, mode), rng.standard_normal(36))
            assert err <= 1e-6

    def test_nll_gradients(self, rng):
        seq = TokenSeq((1,), (2, 4, 1))
        params = 0.3 * rng.standard_normal(9 * 6 + 9 * 12 + 6)
        assert grad_check(nll_evaluator(seq, 9, 6), params) <= 1e-6

    def test_total_loss_gradients_over_all_trainables(self):
        dataset = synthetic_alignment_dataset(4, frame_size=3, vocab_size=9, seed=1)
        model = init_toy_model(27, 6, 9, seed=1)
        err = grad_check(total_loss_evaluator(model, dataset, AlignConfig()), trainable_vector(model))
        assert err <= 1e-6

    def test_absurd_epsilon_breaks_the_check(self, rng):
        err = grad_check(cosine_loss_evaluator(2, 4), rng.standard_normal(16), epsilon=10.0)
        assert err > 1e-3

    def test_lambda1_zero_zeroes_decoder_gradients(self):
        # the decoder is touched only by the NLL terms
        dataset = synthetic_alignment_dataset(3, frame_size=3, vocab_size=7, seed=0)
        model = init_toy_model(27, 5, 7, seed=0)
        _, grad = batch_loss_and_grad(model, dataset, AlignConfig(lambda1=0.0))
        enc_size = model.event_encoder.projection.size + model.event_encoder.bias.size
        assert np.allclose(grad[enc_size:], 0.0)
        assert not np.allclose(grad[:enc_size], 0.0)


class TestTraining:
    def test_quadratic_descent_step(self):
        # f(w) = w^2, lr 0.1, one step from 1.0: w <- 1 - 0.1 * 2 = 0.8
        x, losses = gradient_descent(lambda v: (float(v[0] ** 2), 2.0 * v), np.array([1.0]), 0.1, 1)
        assert x[0] == pytest.approx(0.8, abs=1e-15)
        assert losses == [1.0]

    def test_zero_epochs_is_identity(self):
        dataset = synthetic_alignment_dataset(2, frame_size=3, vocab_size=6, seed=0)
        model = init_toy_model(27, 4, 6, seed=0)
        trained, trajectory = train_toy(dataset, AlignConfig(epochs=0), model)
        assert trajectory == []
        assert np.array_equal(trainable_vector(trained), trainable_vector(model))

    def test_zero_learning_rate_gives_constant_trajectory(self):
        dataset = synthetic_alignment_dataset(2, frame_size=3, vocab_size=6, seed=0)
        model = init_toy_model(27, 4, 6, seed=0)
        _, trajectory = train_toy(dataset, AlignConfig(learning_rate=0.0, epochs=5), model)
        totals = {b.total for b in trajectory}
        assert len(trajectory) == 5 and len(totals) == 1

    def test_descent_reduces_loss_deterministically(self):
        dataset = synthetic_alignment_dataset(8, frame_size=4, vocab_size=10, seed=3)
        model = init_toy_model(48, 8, 10, seed=3)
        cfg = AlignConfig(learning_rate=0.2, epochs=50)
        trained_a, traj_a = train_toy(dataset, cfg, model)
        trained_b, traj_b = train_toy(dataset, cfg, model)
        assert traj_a[-1].total < traj_a[0].total
        assert traj_a == traj_b
        assert np.array_equal(trainable_vector(trained_a), trainable_vector(trained_b))

    def test_image_encoder_stays_frozen(self):
        dataset = synthetic_alignment_dataset(4, frame_size=3, vocab_size=6, seed=0)
        model = init_toy_model(27, 4, 6, seed=0)
        trained, _ = train_toy(dataset, AlignConfig(epochs=3), model)
        assert np.array_equal(trained.image_encoder.projection, model.image_encoder.projection)
        assert np.array_equal(trained.image_encoder.bias, model.image_encoder.bias)


class TestSerialization:
    def test_checkpoint_round_trip(self, tmp_path):
        model = init_toy_model(27, 5, 7, seed=4)
        path = str(tmp_path / "params.bin")
        save_checkpoint(model, path)
        again = load_checkpoint(path)
        assert np.array_equal(again.event_encoder.projection, model.event_encoder.projection)
        assert np.array_equal(again.image_encoder.bias, model.image_encoder.bias)
        assert np.array_equal(again.decoder.output, model.decoder.output)
        assert again.event_encoder.normalize == model.event_encoder.normalize

    def test_vector_round_trip(self):
        model = init_toy_model(12, 3, 5, seed=2)
        vec = trainable_vector(model)
        again = with_trainable_vector(model, vec)
        assert np.array_equal(trainable_vector(again), vec)

    def test_loss_csv_layout(self, tmp_path):
        rows = [LossBreakdown(1.0, 2.0, 0.5, 2.0), LossBreakdown(0.5, 1.0, 0.25, 1.0)]
        path = tmp_path / "losses.csv"
        write_loss_csv(rows, str(path))
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "epoch,l_ev_t,l_ev_im_t,l_c,total"
        assert lines[1].startswith("0,1.0,2.0,0.5,2.0")
        assert len(lines) == 3
