"""
Tests for metric aggregation, report emission and the experiment runner.
"""

import json
import math

import pandas as pd
import pytest

from selab.attack.engine import MAIN_ATTACK, AttackResult, TargetOutcome
from selab.core.config_service import parse_experiment_config
from selab.core.exceptions import ConfigurationError, PhaseError, ReportError
from selab.experiments.metrics import CLEAN, REFINED, CellMetrics, MetricsReport, SeedRow, degree_bucket, sign_test
from selab.experiments.report import emit_report
from selab.experiments.runner import (
    run_account_sweep,
    run_agent_ablation,
    run_experiment,
    run_seed,
    select_targets,
)


def _outcome(target: str, success: bool, degree: int, first: int = 2) -> TargetOutcome:
    return TargetOutcome(
        target=target,
        success=success,
        prob_before=0.9,
        prob_after=0.3 if success else 0.8,
        first_success=first if success else None,
        added_edges=[("u0", target)] * (first if success else 3),
        strategy_counts={"direct": 1, "indirect": 1, "feedback": 0},
        degree=degree,
    )


def _result(attack: str, successes) -> AttackResult:
    result = AttackResult(attack=attack)
    result.outcomes = [_outcome(f"p{i}", s, degree=5 if i % 2 else 50) for i, s in enumerate(successes)]
    return result


def _row(seed: int) -> SeedRow:
    return SeedRow(seed, 4, 3.0, 3.5, 0.9, 0.88, 0.92, 0.9, 6, {})


@pytest.fixture
def two_by_two_report() -> MetricsReport:
    report = MetricsReport(name="unit", seeds=[0, 1])
    for seed, main, other in [(0, [True, True, False, True], [False] * 4), (1, [True, False, False, False], [True, False, False, False])]:
        results = {
            (MAIN_ATTACK, CLEAN): _result(MAIN_ATTACK, main),
            ("random", CLEAN): _result("random", other),
            (MAIN_ATTACK, REFINED): _result(MAIN_ATTACK, other),
            ("random", REFINED): _result("random", other),
        }
        report.add_seed(_row(seed), results, {"data": 1.0, "attack": 2.0})
    return report


class TestMetrics:
    """Cell aggregation and significance"""

    def test_degree_buckets(self):
        assert degree_bucket(0) == "[0,10)"
        assert degree_bucket(10) == "[10,100)"
        assert degree_bucket(5000) == "[100,inf)"
        with pytest.raises(ValueError):
            degree_bucket(-1)

    def test_cell_statistics(self):
        cell = CellMetrics(MAIN_ATTACK, CLEAN)
        cell.add(_result(MAIN_ATTACK, [True, True, False, True]))
        cell.add(_result(MAIN_ATTACK, [True, False, False, False]))
        assert cell.success == [0.75, 0.25]
        assert cell.mean == pytest.approx(0.5)
        assert cell.std == pytest.approx(0.25)
        assert cell.first_success == [2, 2, 2, 2]
        assert cell.mean_prob_before == pytest.approx(0.9)
        assert cell.strategy_shares()["direct"] == pytest.approx(0.5)
        assert cell.degree_rates()["[0,10)"] == pytest.approx(2 / 4)
        assert cell.degree_rates()["[10,100)"] == pytest.approx(2 / 4)
        assert cell.degree_rates()["[100,inf)"] is None

    def test_empty_cell(self):
        cell = CellMetrics("random", CLEAN)
        assert cell.mean == 0.0 and cell.std == 0.0
        assert cell.mean_prob_after is None

    def test_sign_test(self):
        assert sign_test([1, 1, 1, 1, 1], [0, 0, 0, 0, 0]) == pytest.approx(1 / 32)
        assert sign_test([0.5, 0.5], [0.5, 0.5]) == 1.0
        assert sign_test([0, 0], [1, 1]) == pytest.approx(1.0)

    def test_report_ordering_and_round_trip(self, two_by_two_report):
        assert two_by_two_report.attacks == [MAIN_ATTACK, "random"]
        assert two_by_two_report.phases == [CLEAN, REFINED]
        assert [(c.attack, c.phase) for c in two_by_two_report.ordered_cells()] == [
            (MAIN_ATTACK, CLEAN),
            (MAIN_ATTACK, REFINED),
            ("random", CLEAN),
            ("random", REFINED),
        ]
        assert two_by_two_report.success_rate(MAIN_ATTACK) == pytest.approx(0.5)
        assert two_by_two_report.accuracy(REFINED) == [0.92, 0.92]
        doc = two_by_two_report.to_dict()
        assert "timings" not in doc
        assert set(doc["sign_tests"][CLEAN]) == {"random"}
        assert MetricsReport.from_dict(json.loads(json.dumps(doc))).to_dict() == doc


class TestReportFiles:
    """CSV, JSON and plot-data emission"""

    def test_emit_report(self, tmp_path, two_by_two_report):
        files = emit_report(two_by_two_report, tmp_path / "out")
        assert all(f.exists() for f in files)
        table = pd.read_csv(tmp_path / "out" / "success_rates.csv")
        assert list(table.columns) == ["attack", "phase", "mean", "std"]
        assert len(table) == 4
        assert table.iloc[0]["mean"] == pytest.approx(0.5)
        shift = pd.read_csv(tmp_path / "out" / "prob_shift.csv")
        assert shift.iloc[0]["shift"] == pytest.approx(shift.iloc[0]["prob_after"] - shift.iloc[0]["prob_before"])
        dat = (tmp_path / "out" / "plots" / f"success_{MAIN_ATTACK}_{CLEAN}.dat").read_text().splitlines()
        assert dat[0].startswith("#")
        assert dat[1:] == ["0 0.750000", "1 0.250000"]

    def test_byte_identical_outputs(self, tmp_path, two_by_two_report):
        first = emit_report(two_by_two_report, tmp_path / "a")
        second = emit_report(two_by_two_report, tmp_path / "b")
        for a, b in zip(first, second):
            assert a.read_bytes() == b.read_bytes()

    def test_unwritable_directory(self, tmp_path, two_by_two_report):
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory", encoding="utf-8")
        with pytest.raises(ReportError) as exc:
            emit_report(two_by_two_report, blocker / "out")
        assert "blocker" in exc.value.path


class TestRunner:
    """End-to-end pipeline on a tiny synthetic graph"""

    def test_select_targets(self, trained_detector, tiny_graph):
        model, _ = trained_detector
        fake = select_targets(tiny_graph, model.split, "fake", "heldout")
        assert all(tiny_graph.label_of(p) == 1 for p in fake)
        assert set(fake) <= set(model.split.heldout)
        assert fake == [p for p in tiny_graph.post_ids if p in fake]
        assert len(select_targets(tiny_graph, model.split, "real", "all")) == int((tiny_graph.labels == 0).sum())

    @pytest.mark.timeout(300)
    def test_run_experiment_writes_reproducible_report(self, tiny_config_dict, tmp_path):
        config = parse_experiment_config(tiny_config_dict)
        report = run_experiment(config)
        out = tmp_path / "run"
        for name in ("report.json", "success_rates.csv", "prob_shift.csv", "config.json", "timings.json"):
            assert (out / name).exists()
        assert report.attacks == [MAIN_ATTACK, "dice", "random"]
        assert report.phases == [CLEAN, REFINED]
        assert len(report.rows) == 2
        for cell in report.ordered_cells():
            assert 0.0 <= cell.mean <= 1.0
            assert len(cell.success) == 2
        timings = json.loads((out / "timings.json").read_text())
        assert set(timings) == {"0", "1"}
        assert "attack" in timings["0"]

        again = run_experiment(config.model_copy(update={"output_dir": tmp_path / "again"}), workers=2)
        assert (tmp_path / "again" / "report.json").read_bytes() == (out / "report.json").read_bytes()
        assert again.to_dict() == report.to_dict()

    def test_phase_error_names_phase(self, tiny_config_dict, tmp_path):
        tiny_config_dict["graph_path"] = str(tmp_path / "missing.json")
        config = parse_experiment_config(tiny_config_dict)
        with pytest.raises(PhaseError) as exc:
            run_seed(config, 0)
        assert exc.value.phase == "data"
        assert exc.value.seed == 0

    def test_seed_row_shape(self, tiny_config_dict):
        tiny_config_dict.update({"baselines": [], "defend": False, "seeds": [3]})
        row, results, timings = run_seed(parse_experiment_config(tiny_config_dict), 3)
        assert set(results) == {(MAIN_ATTACK, CLEAN)}
        assert row.refined_accuracy is None
        assert row.tree_entropy <= row.single_layer_entropy + 1e-9
        assert set(timings) == {"data", "tree", "categorize", "train", "attack"}
        assert not math.isnan(row.clean_accuracy)


class TestSweeps:
    """Single-agent and account-count variants"""

    @staticmethod
    def _stub(config, write=True):
        report = MetricsReport(name=config.name, seeds=list(config.seeds))
        report.cell(MAIN_ATTACK, CLEAN).success.append(0.5)
        return report

    def test_agent_ablation_skips_empty_budget(self, mocker, tiny_config_dict):
        tiny_config_dict["budgets"] = {"bots": 3, "cyborgs": 0, "workers": 1}
        runner_mock = mocker.patch("selab.experiments.runner.run_experiment", side_effect=self._stub)
        reports = run_agent_ablation(parse_experiment_config(tiny_config_dict), write=False)
        assert list(reports) == ["bot", "worker", "all"]
        configs = [c.args[0] for c in runner_mock.call_args_list]
        assert configs[0].agents.model_dump() == {"bot": True, "cyborg": False, "worker": False}
        assert configs[1].agents.model_dump() == {"bot": False, "cyborg": False, "worker": True}
        assert configs[2].agents.model_dump() == {"bot": True, "cyborg": True, "worker": True}
        assert all(c.baselines == [] and not c.defend for c in configs)

    def test_account_sweep_rejects_unknown_agent(self, tiny_config_dict):
        with pytest.raises(ConfigurationError):
            run_account_sweep(parse_experiment_config(tiny_config_dict), counts=(1,), agents=("troll",), write=False)

    @pytest.mark.timeout(300)
    def test_account_sweep_writes_variants(self, tiny_config_dict, tmp_path):
        tiny_config_dict.update({"seeds": [0], "baselines": [], "defend": False})
        config = parse_experiment_config(tiny_config_dict)
        reports = run_account_sweep(config, counts=(2,), agents=("worker",))
        assert list(reports) == [("worker", 2)]
        variant = json.loads((tmp_path / "run" / "worker-2" / "config.json").read_text())
        assert variant["budgets"] == {"bots": 0, "cyborgs": 0, "workers": 2}
        assert variant["agents"] == {"bot": False, "cyborg": False, "worker": True}
        assert variant["attack"]["t_max"] == config.t_max
        table = pd.read_csv(tmp_path / "run" / "accounts_sweep.csv")
        assert table["accounts"].tolist() == ["worker:2"]
