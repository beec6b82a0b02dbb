import numpy as np
import pytest

from fckan.models import (
    CheckpointError,
    ConfigError,
    Model,
    ModelConfig,
    ShapeMismatch,
    build_model,
    combine_outputs,
    count_params,
    forward_fckan,
    forward_mlp,
    forward_spline_kan,
    load_model,
    save_model,
)
from fckan.tensor import Tensor
from gradcheck import check_model_grads

RNG = np.random.default_rng(0)
X16 = RNG.uniform(-1, 1, (4, 16)).astype(np.float32)
Y16 = np.array([0, 1, 3, 2])


def toy_config(kind, **kw):
    return ModelConfig(kind=kind, widths=(16, 8, 4), seed=0, **kw)


class TestConfig:
    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            ModelConfig(kind="cnn")

    def test_bad_widths(self):
        with pytest.raises(ConfigError):
            ModelConfig(kind="mlp", widths=(784,))
        with pytest.raises(ConfigError):
            ModelConfig(kind="mlp", widths=(784, 0, 10))

    def test_fckan_function_validation(self):
        with pytest.raises(ConfigError):
            ModelConfig(kind="fc-kan", functions=())
        with pytest.raises(ConfigError):
            ModelConfig(kind="fc-kan", functions=("sin", "tanh"))
        with pytest.raises(ConfigError):
            ModelConfig(kind="fc-kan", functions=("sin",), combine="mean")
        with pytest.raises(ConfigError):
            ModelConfig(kind="mlp", functions=("sin",))

    def test_round_trips_through_dict(self):
        cfg = ModelConfig(
            kind="fc-kan", functions=("sin", "cos"), combine="product", seed=7
        )
        assert ModelConfig.from_dict(cfg.to_dict()) == cfg
        cfg2 = toy_config("efficient-kan")
        assert ModelConfig.from_dict(cfg2.to_dict()) == cfg2


class TestParamCounts:
    def test_mlp_reference_architecture(self):
        model = build_model(ModelConfig(kind="mlp", widths=(784, 64, 10)))
        assert count_params(model) == 52512
        assert count_params(model) == 784 * 64 + 64 * 10 + 2 * 784 + 2 * 64

    def test_efficient_kan_reference_architecture(self):
        model = build_model(ModelConfig(kind="efficient-kan", widths=(784, 64, 10)))
        # per layer: base in*out + spline in*(G+k)*out + scaler in*out
        assert count_params(model) == 508160

    def test_fckan_shares_mlp_count(self):
        for fns in [("sin",), ("cos",), ("sin", "cos"), ("arctan", "relu"),
                    ("sin", "cos", "arctan", "relu")]:
            model = build_model(
                ModelConfig(kind="fc-kan", widths=(784, 64, 10), functions=fns)
            )
            assert count_params(model) == 52512

    def test_fckan_within_published_tolerance(self):
        model = build_model(
            ModelConfig(kind="fc-kan", widths=(784, 64, 10), functions=("sin", "cos"))
        )
        assert abs(count_params(model) - 52496) / 52496 < 0.0005

    def test_fast_kan_within_published_tolerance(self):
        model = build_model(ModelConfig(kind="fast-kan", widths=(784, 64, 10)))
        assert abs(count_params(model) - 459098) / 459098 < 0.0005

    def test_bsrbf_kan_within_published_tolerance(self):
        model = build_model(ModelConfig(kind="bsrbf-kan", widths=(784, 64, 10)))
        assert abs(count_params(model) - 459024) / 459024 < 0.0005

    def test_spline_weight_expansion_factor(self):
        model = build_model(toy_config("efficient-kan"))
        # G=5, k=3 expands every input feature to 8 basis values
        assert model.layers[0]["spline_weight"].shape == (16 * 8, 8)
        assert model.layers[1]["spline_weight"].shape == (8 * 8, 4)


class TestForward:
    @pytest.mark.parametrize(
        "kind,kw",
        [
            ("mlp", {}),
            ("fc-kan", {"functions": ("sin", "cos")}),
            ("efficient-kan", {}),
            ("fast-kan", {}),
            ("bsrbf-kan", {}),
        ],
    )
    def test_shapes_and_finiteness(self, kind, kw):
        model = build_model(toy_config(kind, **kw))
        logits = model.forward(Tensor(X16))
        assert logits.shape == (4, 4)
        assert np.all(np.isfinite(logits.data))

    def test_width_mismatch(self):
        model = build_model(toy_config("mlp"))
        with pytest.raises(ShapeMismatch):
            forward_mlp(model, Tensor(np.zeros((2, 8))))

    def test_zero_final_weights_give_zero_logits(self):
        model = build_model(toy_config("mlp"))
        model.layers[-1]["weight"].data[:] = 0.0
        logits = forward_mlp(model, Tensor(np.zeros((3, 16))))
        assert np.all(logits.data == 0.0)

    def test_build_and_forward_deterministic(self):
        a = build_model(toy_config("fc-kan", functions=("sin", "cos")))
        b = build_model(toy_config("fc-kan", functions=("sin", "cos")))
        for pa, pb in zip(a.params, b.params):
            assert np.array_equal(pa.tensor.data, pb.tensor.data)
        la = forward_fckan(a, Tensor(X16))
        lb = forward_fckan(b, Tensor(X16))
        assert np.array_equal(la.data, lb.data)

    def test_doubling_final_weight_doubles_logits(self):
        model = build_model(toy_config("fc-kan", functions=("relu",)))
        base = forward_fckan(model, Tensor(X16)).data.copy()
        model.layers[-1]["weight"].data *= 2.0
        assert np.allclose(forward_fckan(model, Tensor(X16)).data, 2.0 * base, rtol=1e-6)


class TestFckanCombination:
    def test_singleton_is_identity(self):
        model = build_model(toy_config("fc-kan", functions=("sin",)))
        single = _single_pass_logits(model, "sin")
        assert np.array_equal(forward_fckan(model, Tensor(X16)).data, single)

    def test_sum_is_elementwise_sum_of_passes(self):
        model = build_model(
            toy_config("fc-kan", functions=("sin", "cos"), combine="sum")
        )
        o = _single_pass_logits(model, "sin") + _single_pass_logits(model, "cos")
        assert np.allclose(forward_fckan(model, Tensor(X16)).data, o, atol=1e-6)

    def test_product_is_hadamard_of_passes(self):
        model = build_model(
            toy_config("fc-kan", functions=("sin", "arctan"), combine="product")
        )
        o = _single_pass_logits(model, "sin") * _single_pass_logits(model, "arctan")
        assert np.allclose(forward_fckan(model, Tensor(X16)).data, o, atol=1e-6)

    def test_duplicate_function_sum_doubles_single(self):
        single = build_model(toy_config("fc-kan", functions=("cos",)))
        double = build_model(
            toy_config("fc-kan", functions=("cos", "cos"), combine="sum")
        )
        s = forward_fckan(single, Tensor(X16)).data
        d = forward_fckan(double, Tensor(X16)).data
        assert np.allclose(d, 2.0 * s, rtol=1e-6)


class TestCombineOutputs:
    def test_product(self):
        out = combine_outputs(None, [Tensor([2.0, 3.0]), Tensor([4.0, 5.0])], "product")
        assert out.data.tolist() == [[8.0, 15.0]]

    def test_singleton_sum_is_identity(self):
        x = Tensor([1.5, -2.0])
        assert combine_outputs(None, [x], "sum") is x

    def test_product_with_ones_unchanged(self):
        x = Tensor(RNG.uniform(-1, 1, (2, 3)))
        out = combine_outputs(None, [x, Tensor(np.ones((2, 3)))], "product")
        assert np.array_equal(out.data, x.data)

    def test_permutation_invariance(self):
        tensors = [Tensor(RNG.uniform(0.5, 1.5, (2, 3))) for _ in range(3)]
        for method in ("sum", "product"):
            a = combine_outputs(None, tensors, method).data
            b = combine_outputs(None, tensors[::-1], method).data
            assert np.allclose(a, b, rtol=1e-6)

    def test_empty_rejected(self):
        with pytest.raises(ConfigError):
            combine_outputs(None, [], "sum")


class TestSplineForward:
    def test_zero_spline_weights_reduce_to_base_branch(self):
        model = build_model(toy_config("efficient-kan"))
        full = forward_spline_kan(model, Tensor(X16)).data.copy()
        for layer in model.layers:
            layer["spline_weight"].data[:] = 0.0
        base_only = forward_spline_kan(model, Tensor(X16)).data
        assert not np.allclose(full, base_only)  # spline branch was live
        # recompute the base branch by hand
        from fckan.tensor import matmul, silu

        h = Tensor(X16)
        for layer in model.layers:
            h = matmul(None, silu(None, h), layer["base_weight"])
        assert np.allclose(base_only, h.data, atol=1e-6)


class TestEndToEndGradients:
    @pytest.mark.parametrize(
        "kind,kw",
        [
            ("mlp", {}),
            ("fc-kan", {"functions": ("sin", "cos"), "combine": "sum"}),
            ("fc-kan", {"functions": ("sin", "arctan"), "combine": "product"}),
            ("efficient-kan", {}),
            ("fast-kan", {}),
            ("bsrbf-kan", {}),
        ],
    )
    def test_every_parameter_matches_fd(self, kind, kw):
        model = build_model(toy_config(kind, **kw))
        check_model_grads(model, X16, Y16, tol=1e-2)


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        model = build_model(toy_config("fc-kan", functions=("sin", "cos")))
        path = tmp_path / "model.fckn"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.config == model.config
        for pa, pb in zip(model.params, loaded.params):
            assert pa.name == pb.name
            assert np.array_equal(pa.tensor.data, pb.tensor.data)
        a = model.forward(Tensor(X16)).data
        b = loaded.forward(Tensor(X16)).data
        assert np.array_equal(a, b)

    def test_header_layout(self, tmp_path):
        model = build_model(toy_config("mlp"))
        path = tmp_path / "model.fckn"
        save_model(model, path)
        raw = path.read_bytes()
        assert raw[:4] == b"FCKN"
        assert int.from_bytes(raw[4:8], "little") == 1

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bogus.fckn"
        path.write_bytes(b"NOPE" + bytes(64))
        with pytest.raises(CheckpointError, match="magic"):
            load_model(path)

    def test_truncation_rejected(self, tmp_path):
        model = build_model(toy_config("mlp"))
        path = tmp_path / "model.fckn"
        save_model(model, path)
        path.write_bytes(path.read_bytes()[:-20])
        with pytest.raises(CheckpointError):
            load_model(path)


def _single_pass_logits(model: Model, fn: str) -> np.ndarray:
    from fckan.models import _fckan_pass

    return _fckan_pass(model, Tensor(X16), fn, None).data
