"""Network forward/backward, training loop, prediction, and checkpoints."""

import json
import math

import numpy as np
import pytest

from vocaldyn.features.matrix import FeatureMatrix
from vocaldyn.labeling import MASKED_SENTINEL, FrameLabelSequence
from vocaldyn.model import (
    ModelConfig,
    TrainConfig,
    UndefinedLossError,
    backward,
    build_chunks,
    forward,
    init_model,
    load_checkpoint,
    masked_cross_entropy,
    parameter_count,
    predict,
    save_checkpoint,
    train,
    write_history,
)
from vocaldyn.model.network import _forward_cached

TINY = ModelConfig(
    input_bins=8,
    sequence_length=32,
    conv_scales=(3, 7),
    channels=(2, 3),
    attention_heads=2,
    attention_dim=4,
    seed=0,
)


def random_labels(frames, rng, mask_rate=0.7):
    mask = rng.random(frames) < mask_rate
    classes = rng.integers(0, 10, size=frames).astype(np.uint8)
    classes[~mask] = MASKED_SENTINEL
    return FrameLabelSequence(class_index=classes, mask=mask, hop_seconds=0.01)


def labels_from_classes(classes, hop=0.01):
    classes = np.asarray(classes, dtype=np.uint8)
    return FrameLabelSequence(
        class_index=classes, mask=classes != MASKED_SENTINEL, hop_seconds=hop
    )


class TestInit:
    def test_same_seed_identical(self):
        a = init_model(TINY)
        b = init_model(TINY)
        assert all(np.array_equal(a.tensors[k], b.tensors[k]) for k in a.tensors)

    def test_different_seed_differs(self):
        a = init_model(TINY)
        b = init_model(ModelConfig(**{**TINY.__dict__, "seed": 1}))
        assert any(not np.array_equal(a.tensors[k], b.tensors[k]) for k in a.tensors)

    def test_parameter_count_matches_shape_arithmetic(self):
        config = ModelConfig(input_bins=240, sequence_length=4096)
        # hand-applied layer shape formulas for the default architecture
        embed = 240 * 16 + 16
        stage1 = sum(k * 16 * 16 + 16 for k in (3, 7, 15))
        stage2 = sum(k * 48 * 32 + 32 for k in (3, 7, 15))
        attention = 3 * (96 * 64 + 64) + 64 * 96 + 96
        head = 96 * 10 + 10
        expected = embed + stage1 + stage2 + attention + head
        assert expected == 74634
        assert parameter_count(config) == expected
        assert init_model(config).parameter_count == expected

    def test_invalid_configs_rejected(self):
        with pytest.raises(ValueError):
            ModelConfig(input_bins=8, sequence_length=32, attention_heads=3, attention_dim=8)
        with pytest.raises(ValueError):
            ModelConfig(input_bins=8, sequence_length=32, classes=9)
        with pytest.raises(ValueError):
            ModelConfig(input_bins=8, sequence_length=32, channels=(16, 32, 64))


class TestForward:
    def test_sequence_4096_by_240(self):
        params = init_model(ModelConfig(input_bins=240, sequence_length=4096))
        logits = forward(params, np.random.default_rng(0).standard_normal((4096, 240)))
        assert logits.shape == (4096, 10)
        assert np.isfinite(logits).all()

    def test_sequence_10000_by_128(self):
        config = ModelConfig(
            input_bins=128, sequence_length=10000, channels=(4, 4), attention_heads=2,
            attention_dim=8,
        )
        params = init_model(config)
        logits = forward(params, np.random.default_rng(1).standard_normal((10000, 128)))
        assert logits.shape == (10000, 10)

    def test_zero_input_gives_identical_frames(self):
        params = init_model(TINY)
        logits = forward(params, np.zeros((32, 8)))
        np.testing.assert_array_equal(logits, np.tile(logits[:1], (32, 1)))

    def test_bin_mismatch_rejected(self):
        params = init_model(TINY)
        with pytest.raises(ValueError, match="frames x 8"):
            forward(params, np.zeros((32, 9)))

    def test_deterministic(self):
        params = init_model(TINY)
        x = np.random.default_rng(2).standard_normal((32, 8))
        np.testing.assert_array_equal(forward(params, x), forward(params, x))


class TestMaskedCrossEntropy:
    def test_uniform_logits_ln10(self):
        labels = labels_from_classes([0, 5, 9])
        assert masked_cross_entropy(np.zeros((3, 10)), labels) == pytest.approx(math.log(10))

    def test_huge_correct_margin_near_zero(self):
        logits = np.full((2, 10), -50.0)
        logits[0, 3] = 50.0
        logits[1, 7] = 50.0
        assert masked_cross_entropy(logits, labels_from_classes([3, 7])) < 1e-8

    def test_hand_computed_three_frames(self):
        logits = np.array(
            [[1.0, 0.0, 2.0], [0.5, 0.5, 0.5], [3.0, 1.0, 0.0]]
        )
        logits = np.pad(logits, ((0, 0), (0, 7)), constant_values=-40.0)
        labels = labels_from_classes([2, 0, MASKED_SENTINEL])
        # independent scalar arithmetic
        efirst = [math.exp(v) for v in (1.0, 0.0, 2.0)] + [math.exp(-40.0)] * 7
        esecond = [math.exp(0.5)] * 3 + [math.exp(-40.0)] * 7
        expected = (
            -math.log(efirst[2] / sum(efirst)) - math.log(esecond[0] / sum(esecond))
        ) / 2
        assert masked_cross_entropy(logits, labels) == pytest.approx(expected, rel=1e-12)

    def test_all_masked_undefined(self):
        with pytest.raises(UndefinedLossError):
            masked_cross_entropy(np.zeros((3, 10)), labels_from_classes([MASKED_SENTINEL] * 3))

    def test_frame_count_mismatch(self):
        with pytest.raises(ValueError):
            masked_cross_entropy(np.zeros((3, 10)), labels_from_classes([1, 2]))


def loss_of(params, x, labels):
    logits, _ = _forward_cached(params, x)
    return masked_cross_entropy(logits, labels)


class TestGradients:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_matches_central_differences(self, seed):
        rng = np.random.default_rng(seed)
        config = ModelConfig(**{**TINY.__dict__, "seed": seed})
        params = init_model(config, dtype=np.float64)
        x = rng.standard_normal((32, 8))
        labels = random_labels(32, rng)
        _, grads = backward(params, x, labels)
        h = 1e-6
        for name, tensor in params.tensors.items():
            numeric = np.zeros_like(tensor)
            flat = tensor.reshape(-1)
            num_flat = numeric.reshape(-1)
            for i in range(flat.size):
                keep = flat[i]
                flat[i] = keep + h
                up = loss_of(params, x, labels)
                flat[i] = keep - h
                down = loss_of(params, x, labels)
                flat[i] = keep
                num_flat[i] = (up - down) / (2 * h)
            analytic = grads[name]
            diff = np.linalg.norm(analytic - numeric)
            if diff < 1e-7:
                # genuinely zero gradients (e.g. the key bias: a constant
                # added to every key cancels inside the row softmax) leave
                # only finite-difference noise on both sides
                continue
            rel = diff / max(np.linalg.norm(analytic), np.linalg.norm(numeric))
            assert rel < 1e-4, f"{name}: relative error {rel:.2e}"

    def test_zero_mask_no_gradients(self):
        params = init_model(TINY, dtype=np.float64)
        labels = labels_from_classes([MASKED_SENTINEL] * 32)
        with pytest.raises(UndefinedLossError):
            backward(params, np.zeros((32, 8)), labels)

    def test_fully_masked_class_gradient_finite(self):
        rng = np.random.default_rng(7)
        params = init_model(TINY, dtype=np.float64)
        labels = labels_from_classes([3] * 32)  # class 5 (among others) never appears
        _, grads = backward(params, rng.standard_normal((32, 8)), labels)
        assert all(np.isfinite(g).all() for g in grads.values())


class TestPredict:
    def test_matches_per_chunk_argmax(self):
        params = init_model(TINY)
        x = np.random.default_rng(3).standard_normal((80, 8)).astype(np.float32)
        out = predict(params, x)
        assert out.shape == (80,)
        first_chunk = forward(params, x[:32])
        np.testing.assert_array_equal(out[:32], np.argmax(first_chunk, axis=1))

    def test_tie_breaks_to_lowest_class(self):
        params = init_model(TINY)
        params.tensors["head.weight"][:] = 0
        params.tensors["head.bias"][:] = 0
        out = predict(params, np.random.default_rng(4).standard_normal((32, 8)))
        assert (out == 0).all()

    def test_chunked_length_23000(self):
        config = ModelConfig(
            input_bins=4, sequence_length=10000, conv_scales=(3,), channels=(2, 2),
            attention_heads=1, attention_dim=4,
        )
        params = init_model(config)
        x = np.random.default_rng(5).standard_normal((23000, 4)).astype(np.float32)
        assert predict(params, x).shape == (23000,)

    def test_chunks_do_not_leak(self):
        params = init_model(TINY)
        rng = np.random.default_rng(6)
        x = rng.standard_normal((96, 8)).astype(np.float32)
        base = predict(params, x)
        shuffled = x.copy()
        shuffled[32:64], shuffled[64:96] = x[64:96].copy(), x[32:64].copy()
        swapped = predict(params, shuffled)
        np.testing.assert_array_equal(swapped[:32], base[:32])
        np.testing.assert_array_equal(swapped[32:64], base[64:96])

    def test_accepts_feature_matrix(self):
        params = init_model(TINY)
        spec = FeatureMatrix(
            values=np.random.default_rng(8).standard_normal((40, 8)),
            hop_seconds=0.01,
            kind="log_mel",
            source_sample_rate=44100,
        )
        assert predict(params, spec).shape == (40,)


def tiny_dataset(rng, items=2, frames=64):
    dataset = []
    for _ in range(items):
        classes = np.repeat(rng.integers(0, 10, size=frames // 8), 8).astype(np.uint8)
        values = np.repeat(classes[:, None], 8, axis=1) / 10.0 + rng.normal(0, 0.01, (frames, 8))
        spec = FeatureMatrix(
            values=values, hop_seconds=0.01, kind="log_mel", source_sample_rate=44100
        )
        dataset.append((spec, labels_from_classes(classes)))
    return dataset


class TestTrain:
    def test_zero_learning_rate_keeps_params(self):
        dataset = tiny_dataset(np.random.default_rng(0))
        config = ModelConfig(input_bins=8, sequence_length=32, conv_scales=(3,),
                             channels=(2, 2), attention_heads=1, attention_dim=4)
        before = init_model(config)
        snapshot = {k: v.copy() for k, v in before.tensors.items()}
        trained, history = train(dataset, config, TrainConfig(epochs=2, learning_rate=0.0))
        assert all(np.array_equal(trained.tensors[k], snapshot[k]) for k in snapshot)
        assert len(history) == 2

    def test_deterministic_given_seeds(self):
        dataset = tiny_dataset(np.random.default_rng(1))
        config = ModelConfig(input_bins=8, sequence_length=32, conv_scales=(3,),
                             channels=(2, 2), attention_heads=1, attention_dim=4, seed=5)
        run1, hist1 = train(dataset, config, TrainConfig(epochs=3, seed=9))
        run2, hist2 = train(dataset, config, TrainConfig(epochs=3, seed=9))
        assert all(np.array_equal(run1.tensors[k], run2.tensors[k]) for k in run1.tensors)
        assert [h.loss for h in hist1] == [h.loss for h in hist2]

    def test_loss_drops_on_learnable_data(self):
        dataset = tiny_dataset(np.random.default_rng(2))
        config = ModelConfig(input_bins=8, sequence_length=32, conv_scales=(3, 7),
                             channels=(4, 4), attention_heads=2, attention_dim=8)
        _, history = train(dataset, config, TrainConfig(epochs=100, batch_size=1))
        assert history[-1].loss < history[0].loss * 0.5
        assert history[-1].masked_accuracy >= 0.8

    def test_empty_dataset_rejected(self):
        config = ModelConfig(input_bins=8, sequence_length=32)
        with pytest.raises(ValueError, match="empty"):
            train([], config, TrainConfig(epochs=1))

    def test_bins_mismatch_rejected(self):
        dataset = tiny_dataset(np.random.default_rng(3))
        config = ModelConfig(input_bins=16, sequence_length=32)
        with pytest.raises(ValueError, match="bins"):
            train(dataset, config, TrainConfig(epochs=1))

    def test_hop_mismatch_rejected(self):
        (spec, labels), = tiny_dataset(np.random.default_rng(4), items=1)
        bad = FrameLabelSequence(
            class_index=labels.class_index, mask=labels.mask, hop_seconds=0.02
        )
        config = ModelConfig(input_bins=8, sequence_length=32)
        with pytest.raises(ValueError, match="hop"):
            build_chunks([(spec, bad)], config)

    def test_partial_chunk_padding_masked(self):
        (spec, labels), = tiny_dataset(np.random.default_rng(5), items=1, frames=40)
        config = ModelConfig(input_bins=8, sequence_length=32)
        chunks = build_chunks([(spec, labels)], config)
        assert len(chunks) == 2
        tail_x, tail_labels = chunks[1]
        assert tail_x.shape == (32, 8)
        assert (tail_x[8:] == 0).all()
        assert not tail_labels.mask[8:].any()


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        params = init_model(TINY)
        path = tmp_path / "model.dynm"
        save_checkpoint(path, params)
        loaded = load_checkpoint(path)
        assert loaded.config == TINY
        assert set(loaded.tensors) == set(params.tensors)
        for k in params.tensors:
            np.testing.assert_array_equal(loaded.tensors[k], params.tensors[k])

    def test_wrong_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.dynm"
        path.write_bytes(b"XXXX" + b"\x00" * 20)
        with pytest.raises(ValueError, match="DYNM"):
            load_checkpoint(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        params = init_model(TINY)
        path = tmp_path / "model.dynm"
        save_checkpoint(path, params)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(ValueError, match="trailing"):
            load_checkpoint(path)

    def test_history_json_lines(self, tmp_path):
        dataset = tiny_dataset(np.random.default_rng(6))
        config = ModelConfig(input_bins=8, sequence_length=32, conv_scales=(3,),
                             channels=(2, 2), attention_heads=1, attention_dim=4)
        _, history = train(dataset, config, TrainConfig(epochs=2))
        path = tmp_path / "history.jsonl"
        write_history(path, history)
        lines = path.read_text().strip().split("\n")
        assert len(lines) == 2
        row = json.loads(lines[0])
        assert set(row) == {"epoch", "loss", "masked_accuracy"}
