"""Shape-function network construction and forward-pass behavior."""

import numpy as np
import pytest

from evinam.autodiff import Tensor
from evinam.exceptions import ConfigError, DomainError
from evinam.networks import ShapeNetConfig, init_shape_net, shape_forward


def make_net(feature_index=0, **overrides):
    config = ShapeNetConfig(**{**dict(hidden_sizes=(8, 4), n_outputs=4,
                                      init_seed=0), **overrides})
    return init_shape_net(config, feature_index)


class TestInit:
    def test_fresh_net_outputs_exactly_zero(self):
        # final-layer weights and biases start at zero, so every raw output
        # is identically zero regardless of the input
        net = make_net()
        outputs = net.forward(Tensor(np.linspace(-5, 5, 7).reshape(-1, 1)))
        assert len(outputs) == 4
        for out in outputs:
            np.testing.assert_array_equal(out.data, np.zeros(7))

    def test_same_seed_same_weights(self):
        a, b = make_net(), make_net()
        for pa, pb in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(pa.data, pb.data)

    def test_different_seed_different_weights(self):
        a, b = make_net(init_seed=0), make_net(init_seed=1)
        gaps = [np.max(np.abs(pa.data - pb.data))
                for pa, pb in zip(a.parameters(), b.parameters())]
        assert max(gaps) > 0.0

    def test_different_feature_index_different_weights(self):
        a, b = make_net(feature_index=0), make_net(feature_index=1)
        gaps = [np.max(np.abs(pa.data - pb.data))
                for pa, pb in zip(a.parameters(), b.parameters())]
        assert max(gaps) > 0.0

    def test_trunk_biases_start_at_zero(self):
        net = make_net()
        for _, bias in net.trunks[0]:
            np.testing.assert_array_equal(bias.data, np.zeros_like(bias.data))

    def test_separate_nets_get_one_trunk_per_output(self):
        shared = make_net(separate_nets=False)
        separate = make_net(separate_nets=True)
        assert len(shared.trunks) == 1
        assert len(separate.trunks) == 4
        assert len(separate.parameters()) > len(shared.parameters())

    def test_kaiming_uniform_bound_respected(self):
        net = make_net(hidden_sizes=(64,))
        first_w = net.trunks[0][0][0]
        fan_in = 1
        bound = np.sqrt(6.0 / fan_in)
        assert np.max(np.abs(first_w.data)) <= bound


class TestForward:
    def test_output_shapes(self):
        net = make_net()
        outputs = net.forward(Tensor(np.zeros((5, 1))))
        assert [tuple(o.shape) for o in outputs] == [(5,)] * 4

    def test_shape_forward_stacks_outputs(self):
        net = make_net()
        out = shape_forward(net, np.linspace(-1, 1, 6))
        assert out.shape == (6, 4)

    def test_rejects_non_finite_input(self):
        net = make_net()
        with pytest.raises(DomainError):
            net.forward(Tensor(np.array([[np.nan]])))

    def test_gelu_activation_runs(self):
        net = make_net(activation="gelu")
        out = shape_forward(net, np.array([0.3, -0.4]))
        assert out.shape == (2, 4)

    def test_trained_like_weights_give_nonzero_outputs(self):
        net = make_net()
        rng = np.random.default_rng(3)
        for p in net.parameters():
            p.data = rng.normal(scale=0.3, size=p.data.shape)
        out = shape_forward(net, np.array([0.5, 1.5]))
        assert np.abs(out).max() > 0.0


class TestConfig:
    def test_rejects_unknown_activation(self):
        with pytest.raises(ConfigError):
            ShapeNetConfig(activation="tanh").validate()

    def test_rejects_empty_hidden_sizes(self):
        with pytest.raises(ConfigError):
            ShapeNetConfig(hidden_sizes=()).validate()

    def test_rejects_nonpositive_width(self):
        with pytest.raises(ConfigError):
            ShapeNetConfig(hidden_sizes=(8, 0)).validate()

    def test_rejects_nonpositive_outputs(self):
        with pytest.raises(ConfigError):
            ShapeNetConfig(n_outputs=0).validate()
