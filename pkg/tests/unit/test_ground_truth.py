"""Unit tests for ground-truth models and the model generator config."""

import pytest

from src.core.domain.ground_truth import (
    GroundTruthGraph,
    GroundTruthModel,
    Link,
    LinkFunction,
    NoiseDist,
    NoiseSpec,
    majority_counterexample_model,
    motivational_model,
)
from src.core.domain.model_config import ModelConfig, ModelKind


class TestLink:
    """Test Link invariants."""

    def test_contemporaneous_self_link_raises(self) -> None:
        """A variable cannot cause itself at lag zero."""
        with pytest.raises(ValueError, match="self-link"):
            Link(1, 0, 1, 0.5)

    def test_zero_coefficient_raises(self) -> None:
        """Links must carry a non-zero coefficient."""
        with pytest.raises(ValueError, match="zero coefficient"):
            Link(0, 1, 1, 0.0)

    def test_negative_lag_raises(self) -> None:
        """Lags are non-negative."""
        with pytest.raises(ValueError, match="non-negative"):
            Link(0, -1, 1, 0.5)


class TestNoiseSpec:
    """Test NoiseSpec invariants."""

    def test_odd_binomial_trials_raise(self) -> None:
        """Binomial noise needs an even number of trials."""
        with pytest.raises(ValueError, match="even integer"):
            NoiseSpec(NoiseDist.BINOM, 3)

    def test_negative_scale_raises(self) -> None:
        """Scales are non-negative."""
        with pytest.raises(ValueError, match="non-negative"):
            NoiseSpec(NoiseDist.GAUSS, -1.0)


class TestGroundTruthGraph:
    """Test structural validation."""

    def test_contemporaneous_cycle_raises(self) -> None:
        """Contemporaneous links must form a DAG."""
        with pytest.raises(ValueError, match="cycle"):
            GroundTruthGraph(2, frozenset({(0, 0, 1), (1, 0, 0)}), (0, 1))

    def test_lagged_feedback_is_allowed(self) -> None:
        """Feedback through a lag is not a cycle."""
        graph = GroundTruthGraph(2, frozenset({(0, 0, 1), (1, 1, 0)}), (0, 1))

        assert graph.p_ts == 1

    def test_unsorted_observed_raises(self) -> None:
        """observed must be sorted and unique."""
        with pytest.raises(ValueError, match="sorted and unique"):
            GroundTruthGraph(3, frozenset(), (2, 0))

    def test_unknown_variable_raises(self) -> None:
        """Links must reference existing variables."""
        with pytest.raises(ValueError, match="unknown variable"):
            GroundTruthGraph(2, frozenset({(0, 1, 5)}), (0, 1))

    def test_contemporaneous_order_is_topological(self) -> None:
        """Causes come before effects in the contemporaneous order."""
        graph = GroundTruthGraph(3, frozenset({(2, 0, 0), (0, 0, 1)}), (0, 1, 2))
        order = graph.contemporaneous_order()

        assert order.index(2) < order.index(0) < order.index(1)

    def test_latent_variables(self) -> None:
        """Unobserved indices are latent."""
        graph = GroundTruthGraph(4, frozenset(), (0, 2))

        assert graph.latent == (1, 3)
        assert graph.n_observed == 2


class TestGroundTruthModel:
    """Test the parametrized model."""

    def test_default_noise_per_variable(self) -> None:
        """Missing noise specs default to unit Gaussians."""
        model = GroundTruthModel(n_vars=2, links=[Link(0, 1, 1, 0.5)], observed=[0, 1])

        assert model.noise == [NoiseSpec(), NoiseSpec()]
        assert model.is_linear
        assert not model.is_discrete

    def test_duplicate_links_raise(self) -> None:
        """Two links with the same (i, tau, j) are rejected."""
        with pytest.raises(ValueError, match="duplicate"):
            GroundTruthModel(
                n_vars=2, links=[Link(0, 1, 1, 0.5), Link(0, 1, 1, 0.3)], observed=[0, 1]
            )

    def test_mixed_binomial_noise_raises(self) -> None:
        """Binomial noise applies to all variables or none."""
        with pytest.raises(ValueError, match="all variables or none"):
            GroundTruthModel(
                n_vars=2,
                links=[],
                observed=[0, 1],
                noise=[NoiseSpec(NoiseDist.BINOM, 2), NoiseSpec()],
            )

    def test_from_dict_round_trip(self) -> None:
        """Model JSON parses back into an equal model."""
        model = GroundTruthModel(
            n_vars=3,
            links=[Link(0, 1, 0, 0.7), Link(0, 0, 1, -0.4, LinkFunction.NONLIN_F1)],
            observed=[0, 1],
            noise=[NoiseSpec(NoiseDist.WEIBULL, 1.5), NoiseSpec(), NoiseSpec(scale=0.5)],
        )

        parsed = GroundTruthModel.from_dict(model.to_dict())

        assert parsed.to_dict() == model.to_dict()
        assert not parsed.is_linear

    def test_from_dict_missing_field_raises(self) -> None:
        """n_vars is required."""
        with pytest.raises(ValueError, match="missing field"):
            GroundTruthModel.from_dict({"links": []})

    def test_motivational_model(self) -> None:
        """Three observed series with a hidden contemporaneous confounder."""
        model = motivational_model()

        assert model.observed == [0, 1, 2]
        assert model.graph.latent == (3,)
        assert {(3, 0, 0), (3, 0, 1), (1, 1, 2)} <= {link.key for link in model.links}

    def test_majority_counterexample_model(self) -> None:
        """Six observed variables, two latent, contemporaneous links only."""
        model = majority_counterexample_model()

        assert model.graph.n_observed == 6
        assert model.graph.latent == (6, 7)
        assert model.p_ts == 0


class TestModelConfig:
    """Test ModelConfig invariants and parsing."""

    def test_observed_count_rounds_up(self) -> None:
        """N = ceil((1 - lambda) * N_total)."""
        assert ModelConfig(n_total=7, latent_fraction=0.3).n_observed == 5
        assert ModelConfig(n_total=5, latent_fraction=0.3).n_observed == 4
        assert ModelConfig(n_total=4, latent_fraction=0.0).n_observed == 4

    def test_links_default_to_n_total(self) -> None:
        """L defaults to the number of variables and vanishes for one variable."""
        assert ModelConfig(n_total=6).links == 6
        assert ModelConfig(n_total=6, n_links=2).links == 2
        assert ModelConfig(n_total=1).links == 0

    def test_odd_n_bin_raises_for_discrete(self) -> None:
        """Discrete models need an even number of trials."""
        with pytest.raises(ValueError, match="n_bin"):
            ModelConfig(kind=ModelKind.DISCRETE, n_bin=3)

    def test_invalid_range_raises(self) -> None:
        """Ranges must satisfy 0 < low <= high."""
        with pytest.raises(ValueError, match="coeff_range"):
            ModelConfig(coeff_range=(0.8, 0.2))

    def test_autocorr_of_one_raises(self) -> None:
        """Unit autocorrelation is not stationary."""
        with pytest.raises(ValueError, match="autocorr"):
            ModelConfig(autocorr=1.0)

    def test_from_dict_converts_ranges_and_kind(self) -> None:
        """Lists become tuples and kind becomes a ModelKind."""
        config = ModelConfig.from_dict({"sigma_range": [1, 2], "kind": "nonlinear"})

        assert config.sigma_range == (1.0, 2.0)
        assert config.kind == ModelKind.NONLINEAR

    def test_from_dict_unknown_key_raises(self) -> None:
        """Unknown keys are reported."""
        with pytest.raises(ValueError, match="Unknown model config fields"):
            ModelConfig.from_dict({"n_vars": 3})

    def test_to_dict_round_trip(self) -> None:
        """to_dict parses back into an equal config."""
        config = ModelConfig(n_total=4, autocorr=0.9, kind=ModelKind.DISCRETE, n_bin=4)

        assert ModelConfig.from_dict(config.to_dict()) == config
