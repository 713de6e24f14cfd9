"""Integration Test - Benchmark Flow.

Tests the method comparison on sampled data:
1. Simulate a model and write data and model files
2. Discover from the data file with ParCorr
3. Score the estimate against the true PAG
4. Run a small replicated grid through the benchmark service
"""

from pathlib import Path

import pytest

from src.adapters.filesystem_adapter import FileSystemAdapter
from src.adapters.oracle_ci_adapter import OracleCIAdapter
from src.adapters.parcorr_adapter import ParCorrAdapter
from src.core.domain.discovery_config import DiscoveryConfig, Method
from src.core.domain.experiment_config import ExperimentConfig
from src.core.domain.graph import LinkClass
from src.core.domain.model_config import ModelConfig
from src.core.services.benchmark_service import BenchmarkRequest, create_benchmark_service
from src.core.services.discovery_service import DiscoveryRequest, create_discovery_service
from src.core.services.scoring import compare_graphs
from src.core.services.simulation_service import SimulationRequest, create_simulation_service

pytestmark = pytest.mark.integration


class TestSimulateDiscoverScore:
    """Files written by one step feed the next."""

    def test_round_trip_through_files(self, tmp_path: Path) -> None:
        """Data and model files reproduce the in-memory run."""
        adapter = FileSystemAdapter(tmp_path)
        simulated = create_simulation_service().simulate(
            SimulationRequest(
                T=800,
                seed=4,
                model_config=ModelConfig(n_total=4, autocorr=0.9, latent_fraction=0.25, p_ts=1),
            )
        )
        adapter.save_csv("data.csv", simulated.data)
        adapter.save_model("model.json", simulated.model)

        data = adapter.load_csv("data.csv")
        model = adapter.load_model("model.json")
        config = DiscoveryConfig(alpha=0.01, tau_max=1, k=1)
        response = create_discovery_service(ParCorrAdapter(data)).discover(
            DiscoveryRequest(data.shape[1], config, Method.LPCMCI)
        )
        truth = OracleCIAdapter.from_truth(model, 1).oracle.true_pag()

        metrics = compare_graphs(response.graph, truth, response.imin)

        # Autodependencies of 0.6 and above are found at this length
        assert metrics.classes[LinkClass.AUTO].tpr == 1.0
        assert response.n_tests > 0
        adapter.save_graph("graph.json", response.graph)
        assert adapter.load_graph("graph.json") == response.graph


class TestBenchmarkGrid:
    """A small ParCorr grid end to end."""

    @pytest.mark.slow
    def test_grid_with_two_methods(self) -> None:
        """Both methods produce pooled metrics for every replication."""
        experiment = ExperimentConfig(
            name="parcorr-small",
            method=(Method.LPCMCI, Method.SVARFCI),
            k=(1,),
            tau_max=(1,),
            T=(300,),
            reps=4,
            model={"n_total": (4,), "autocorr": (0.8,), "p_ts": (1,)},
        )

        response = create_benchmark_service().run(BenchmarkRequest(experiment, jobs=2))

        report = response.report
        assert report.failed_cells == []
        assert [cell.metrics.n_runs for cell in report.cells] == [4, 4]
        frame = report.to_frame()
        assert frame["tpr"].between(0.0, 1.0).all()
        assert frame["fpr"].between(0.0, 1.0).all()
