"""Head assembly: links before the sum, exact contribution tables."""

import math

import numpy as np
import pytest

from evinam.autodiff import Tensor, softplus_values
from evinam.exceptions import ConfigError, DomainError, InvalidInputError
from evinam.heads import (DEFAULT_LINKS, NIG_PARAM_NAMES, NU_FLOOR,
                          DirichletParams, LinkBundle, assemble_dirichlet,
                          assemble_nig, contributions)
from evinam.model import EviNamModel

LOG2 = math.log(2.0)


def raw_rows(values):
    """[features, 4] nested floats -> per-feature tensor rows (batch of 1)."""
    return [[Tensor(np.array([v])) for v in row] for row in values]


def randomized_model(n_features, seed, task="regression", **kwargs):
    names = [f"x{j}" for j in range(n_features)]
    model = EviNamModel.build(task=task, feature_names=names, hidden_sizes=(6, 4),
                              seed=seed, **kwargs)
    rng = np.random.default_rng(seed + 1000)
    for p in model.parameters():
        p.data = rng.normal(scale=0.5, size=p.data.shape)
    return model


class TestAssembleNIG:
    def test_all_zero_raws_give_known_parameters(self):
        # two features and a bias, every raw value 0: each softplus term is
        # ln 2, so nu = beta = 3 ln 2 and alpha picks up +1 per term
        params = assemble_nig(raw_rows([[0.0] * 4, [0.0] * 4]),
                              [Tensor(0.0)] * 4)
        assert params.gamma.data[0] == pytest.approx(0.0, abs=0)
        assert params.nu.data[0] == pytest.approx(3 * LOG2, rel=1e-12)
        assert params.alpha.data[0] == pytest.approx(3 * LOG2 + 3, rel=1e-12)
        assert params.beta.data[0] == pytest.approx(3 * LOG2, rel=1e-12)

    def test_identity_link_passes_gamma_through(self):
        params = assemble_nig(raw_rows([[2.5, 0.0, 0.0, 0.0]]),
                              [Tensor(-0.5), Tensor(0.0), Tensor(0.0), Tensor(0.0)])
        assert params.gamma.data[0] == pytest.approx(2.0, rel=1e-12)

    def test_assembly_is_sum_of_linked_terms(self):
        rng = np.random.default_rng(5)
        raws = rng.normal(scale=2.0, size=(3, 4))
        biases = rng.normal(scale=2.0, size=4)
        params = assemble_nig(raw_rows(raws), [Tensor(b) for b in biases])
        sp = softplus_values
        expected = {
            "gamma": biases[0] + raws[:, 0].sum(),
            "nu": sp(biases[1]) + sp(raws[:, 1]).sum(),
            "alpha": (sp(biases[2]) + 1) + (sp(raws[:, 2]) + 1).sum(),
            "beta": sp(biases[3]) + sp(raws[:, 3]).sum(),
        }
        for name in NIG_PARAM_NAMES:
            got = getattr(params, name).data[0]
            assert got == pytest.approx(expected[name], rel=1e-12), name

    def test_feature_order_does_not_matter(self):
        rng = np.random.default_rng(9)
        raws = rng.normal(size=(4, 4))
        biases = [Tensor(b) for b in rng.normal(size=4)]
        forward = assemble_nig(raw_rows(raws), biases)
        backward = assemble_nig(raw_rows(raws[::-1]), biases)
        for name in NIG_PARAM_NAMES:
            np.testing.assert_allclose(getattr(forward, name).data,
                                       getattr(backward, name).data, rtol=1e-15)

    def test_link_at_sum_differs_from_per_term(self):
        # softplus(a + b) != softplus(a) + softplus(b): with all raws at 0,
        # the summed-then-linked nu is softplus(0+0+0) = ln 2, not 3 ln 2
        rows = raw_rows([[0.0] * 4, [0.0] * 4])
        at_sum = assemble_nig(rows, [Tensor(0.0)] * 4, link_at_sum=True)
        assert at_sum.nu.data[0] == pytest.approx(LOG2, rel=1e-12)
        per_term = assemble_nig(rows, [Tensor(0.0)] * 4)
        assert abs(at_sum.nu.data[0] - per_term.nu.data[0]) > 0.5

    def test_constraints_hold_at_extreme_raws(self):
        for magnitude in (1e6, -1e6):
            rows = raw_rows([[magnitude] * 4])
            params = assemble_nig(rows, [Tensor(magnitude)] * 4)
            params.validate()
            gamma, nu, alpha, beta = params.arrays()
            assert np.isfinite([gamma, nu, alpha, beta]).all()

    def test_nu_floor_engages_when_all_evidence_underflows(self):
        params = assemble_nig(raw_rows([[-1e6] * 4]), [Tensor(-1e6)] * 4)
        assert params.nu.data[0] == NU_FLOOR

    def test_rejects_wrong_bias_count(self):
        with pytest.raises(InvalidInputError):
            assemble_nig(raw_rows([[0.0] * 4]), [Tensor(0.0)] * 3)

    def test_rejects_ragged_rows(self):
        with pytest.raises(InvalidInputError):
            assemble_nig([[Tensor(0.0)] * 3], [Tensor(0.0)] * 4)

    def test_rejects_empty_features(self):
        with pytest.raises(InvalidInputError):
            assemble_nig([], [Tensor(0.0)] * 4)

    def test_unknown_link_name_rejected(self):
        with pytest.raises(ConfigError):
            LinkBundle(nu="quadratic").validate()


class TestAssembleDirichlet:
    def test_all_zero_raws(self):
        # three classes, two features: concentration = 1 + 2 softplus(0)
        rows = [[Tensor(np.array([0.0]))] * 3 for _ in range(2)]
        params = assemble_dirichlet(rows)
        for alpha in params.alphas:
            assert alpha.data[0] == pytest.approx(1 + 2 * LOG2, rel=1e-12)
        np.testing.assert_allclose(params.evidence(), 2 * LOG2, rtol=1e-12)

    def test_concentrations_stay_at_least_one(self):
        rows = [[Tensor(np.array([-50.0, 3.0]))] * 2]
        params = assemble_dirichlet(rows)
        params.validate()
        assert params.matrix().min() >= 1.0

    def test_rejects_identity_link(self):
        rows = [[Tensor(np.array([0.0]))] * 2]
        with pytest.raises(ConfigError):
            assemble_dirichlet(rows, evidence_link="identity")

    def test_rejects_single_class(self):
        with pytest.raises(InvalidInputError):
            assemble_dirichlet([[Tensor(np.array([0.0]))]])

    def test_validate_rejects_concentration_below_one(self):
        bad = DirichletParams(alphas=[np.array([0.5]), np.array([2.0])])
        with pytest.raises(DomainError):
            bad.validate()


class TestParamValidation:
    def test_nig_validate_rejects_bad_values(self):
        good = dict(gamma=np.array([0.0]), nu=np.array([1.0]),
                    alpha=np.array([2.0]), beta=np.array([1.0]))
        from evinam.heads import NIGParams
        NIGParams(**good).validate()
        for field, bad in (("nu", 0.0), ("alpha", 1.0), ("beta", -1.0),
                           ("gamma", np.nan)):
            params = NIGParams(**{**good, field: np.array([bad])})
            with pytest.raises(DomainError):
                params.validate()


class TestContributions:
    def test_table_reassembles_forward_parameters(self):
        model = randomized_model(3, seed=2)
        rng = np.random.default_rng(3)
        x = rng.normal(size=(6, 3))
        params = model.forward(x)
        stacked = np.stack(params.arrays(), axis=1)
        for i in range(x.shape[0]):
            table = model.contributions(x[i])
            np.testing.assert_allclose(table.assembled(), stacked[i], atol=1e-9)

    def test_table_shape_and_names(self):
        model = randomized_model(2, seed=4)
        table = model.contributions(np.array([0.3, -0.8]))
        assert table.feature_names == ("x0", "x1")
        assert table.param_names == NIG_PARAM_NAMES
        assert table.values.shape == (2, 4)
        assert table.bias.shape == (4,)

    def test_as_dict_round_trips_values(self):
        model = randomized_model(2, seed=6)
        table = model.contributions(np.array([1.0, -1.0]))
        payload = table.as_dict()
        assert set(payload) == {"bias", "features"}
        for j, name in enumerate(table.feature_names):
            for k, pname in enumerate(table.param_names):
                assert payload["features"][name][pname] == pytest.approx(
                    table.values[j, k], rel=1e-15)

    def test_classification_bias_row_is_all_ones(self):
        model = randomized_model(2, seed=8, task="classification",
                                 class_names=("a", "b", "c"))
        table = model.contributions(np.array([0.5, 0.5]))
        np.testing.assert_array_equal(table.bias, np.ones(3))
        alphas = model.forward(np.array([[0.5, 0.5]]))
        np.testing.assert_allclose(table.assembled(),
                                   alphas.matrix()[0], atol=1e-9)

    def test_link_at_sum_breaks_the_table(self):
        # the decomposition is only exact for per-term links; under
        # link_at_sum the re-summed table must disagree with the forward pass
        model = randomized_model(2, seed=10, link_at_sum=True)
        x = np.array([0.4, -0.2])
        table = model.contributions(x)
        params = model.forward(x.reshape(1, -1))
        stacked = np.stack([a[0] for a in params.arrays()])
        assert np.max(np.abs(table.assembled() - stacked)) > 1e-6

    def test_rejects_wrong_width(self):
        model = randomized_model(2, seed=12)
        with pytest.raises(InvalidInputError):
            model.contributions(np.array([1.0, 2.0, 3.0]))
