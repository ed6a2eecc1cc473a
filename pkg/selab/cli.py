"""
Command-line interface.

Every subcommand reads and writes JSON artifacts so the pipeline can be run
phase by phase; ``run`` executes the whole experiment from one config file.

Exit codes: 0 success, 2 configuration or input error, 3 phase failure.
"""

import json
import sys
from functools import wraps
from pathlib import Path
from typing import Any, Dict, List, Optional

import click
from pydantic import ValidationError

from selab.attack.baselines import baseline_attack
from selab.attack.engine import MAIN_ATTACK, collect_manipulations, run_attack
from selab.core.config_service import (
    DEFAULT_ADJUSTING_PARAMETER,
    AgentToggles,
    AttackHyperparams,
    Budgets,
    DetectorHyperparams,
    StrategyToggles,
    SyntheticSpec,
    get_settings,
    load_experiment_config,
)
from selab.core.exceptions import ConfigurationError, LabException
from selab.core.logger_manager import configure_logging, get_logger
from selab.detector.model import DetectorModel
from selab.detector.training import evaluate, refine_with_attacks, train
from selab.entropy.encoding_tree import EncodingTree
from selab.entropy.measures import one_dim_entropy, tree_entropy
from selab.entropy.optimizer import DEFAULT_TOLERANCE, optimize_tree
from selab.experiments.metrics import MetricsReport
from selab.experiments.report import emit_report, write_json
from selab.experiments.runner import (
    run_account_sweep,
    run_agent_ablation,
    run_experiment,
    run_height_sweep,
    run_strategy_ablation,
    select_targets,
)
from selab.graph.bipartite import BipartiteGraph, unweighted
from selab.graph.io import load_graph, save_graph
from selab.graph.synthetic import generate_synthetic
from selab.influence.categorize import AccountGroups, categorize

logger = get_logger(__name__)

EXIT_CONFIG = 2
EXIT_PHASE = 3

_existing = click.Path(exists=True, dir_okay=False, path_type=Path)
_output = click.Path(dir_okay=False, path_type=Path)


def _handle_errors(func):
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ConfigurationError, ValidationError, json.JSONDecodeError) as e:
            click.echo(f"Configuration error: {getattr(e, 'message', e)}", err=True)
            for error in getattr(e, "details", {}).get("errors", []):
                click.echo(f"  {'.'.join(str(p) for p in error.get('loc', []))}: {error.get('msg')}", err=True)
            sys.exit(EXIT_CONFIG)
        except LabException as e:
            click.echo(f"Error: {e.message}", err=True)
            sys.exit(EXIT_PHASE)

    return wrapper


def _read_json(path: Path) -> Dict[str, Any]:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _csv_list(text: Optional[str]) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()] if text else []


def _int_list(text: str, name: str) -> List[int]:
    try:
        values = [int(part) for part in _csv_list(text)]
    except ValueError as e:
        raise ConfigurationError(f"invalid {name} '{text}'") from e
    if not values:
        raise ConfigurationError(f"no {name} given")
    return values


def _strategies(text: str) -> StrategyToggles:
    names = set(_csv_list(text))
    unknown = names - {"direct", "indirect", "feedback"}
    if unknown:
        raise ConfigurationError(f"unknown strategies {sorted(unknown)}")
    return StrategyToggles(direct="direct" in names, indirect="indirect" in names, feedback="feedback" in names)


def _agents(text: str) -> AgentToggles:
    names = set(_csv_list(text))
    unknown = names - {"bot", "cyborg", "worker"}
    if unknown:
        raise ConfigurationError(f"unknown agents {sorted(unknown)}")
    return AgentToggles(bot="bot" in names, cyborg="cyborg" in names, worker="worker" in names)


def _load_inputs(graph: Path, tree: Path, groups: Path, model: Path):
    g = load_graph(graph)
    return g, EncodingTree.from_dict(_read_json(tree), g), AccountGroups.load(groups), DetectorModel.load(model)


def read_targets(path: Path) -> List[str]:
    """One post id per line; blank lines and ``#`` comments are skipped."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [line.strip() for line in lines if line.strip() and not line.strip().startswith("#")]


def _targets(g: BipartiteGraph, model: DetectorModel, targets_file: Optional[Path], label: str) -> List[str]:
    if targets_file is not None:
        explicit = read_targets(targets_file)
        if not explicit:
            raise ConfigurationError(f"no target ids in {targets_file}")
        return explicit
    if model.split is None:
        raise ConfigurationError("model has no stored split; pass --targets explicitly")
    return select_targets(g, model.split, label, "heldout")


@click.group()
@click.option("--log-level", default=None, help="Log level (defaults to SELAB_LOG_LEVEL)")
@click.option("--json-logs/--plain-logs", default=None, help="Structured JSON logs or plain console lines")
def main(log_level: Optional[str], json_logs: Optional[bool]):
    """Structural-entropy adversarial lab for user-post graphs."""
    settings = get_settings()
    configure_logging(log_level or settings.log_level, settings.json_logs if json_logs is None else json_logs)


@main.command()
@click.option("--out", type=_output, required=True, help="Graph JSON to write")
@click.option("--seed", type=int, default=0, show_default=True, help="Generator seed")
@click.option("--config", "config_path", type=_existing, default=None, help="Take the synthetic spec from a config")
@click.option("--communities", type=int, default=None, help="Number of planted communities")
@click.option("--users-per-community", type=int, default=None)
@click.option("--posts-per-community", type=int, default=None)
@click.option("--fake-fraction", type=float, default=None, help="Share of fake posts per community")
@_handle_errors
def synth(out, seed, config_path, communities, users_per_community, posts_per_community, fake_fraction):
    """Generate a planted-community synthetic graph."""
    base = SyntheticSpec()
    if config_path is not None:
        config = load_experiment_config(config_path)
        base = config.synthetic or base
    overrides = {
        "communities": communities,
        "users_per_community": users_per_community,
        "posts_per_community": posts_per_community,
        "fake_fraction": fake_fraction,
    }
    spec = SyntheticSpec.model_validate({**base.model_dump(), **{k: v for k, v in overrides.items() if v is not None}})
    g = generate_synthetic(spec, seed)
    save_graph(g, out)
    click.echo(f"{g.num_users} users, {g.num_posts} posts, {g.num_edges} edges -> {out}")


@main.command("build-tree")
@click.option("--graph", type=_existing, required=True, help="Graph JSON")
@click.option("--k", "--height", "height", type=int, default=3, show_default=True, help="Encoding tree height K (>= 2)")
@click.option("--tolerance", type=float, default=DEFAULT_TOLERANCE, show_default=True)
@click.option("--unweighted", "use_unweighted", is_flag=True, help="Ignore edge weights")
@click.option("--out", type=_output, required=True, help="Tree JSON to write")
@_handle_errors
def build_tree(graph, height, tolerance, use_unweighted, out):
    """Build a low-entropy encoding tree."""
    g = load_graph(graph)
    if use_unweighted:
        g = unweighted(g)
    t = optimize_tree(g, height, tolerance)
    write_json(out, t.to_dict())
    click.echo(f"tree entropy {tree_entropy(g, t):.6f} bits (single layer {one_dim_entropy(g):.6f}) -> {out}")


@main.command("categorize")
@click.option("--graph", type=_existing, required=True)
@click.option("--tree", type=_existing, default=None, help="Tree JSON (required unless --mode single_layer)")
@click.option("--c", "c", type=float, default=DEFAULT_ADJUSTING_PARAMETER, show_default=True, help="Adjusting parameter")
@click.option("--budgets", default="20,10,4", show_default=True, help="bots,cyborgs,workers")
@click.option("--mode", type=click.Choice(["tree", "single_layer"]), default="tree", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=_output, required=True, help="Groups JSON to write")
@_handle_errors
def categorize_cmd(graph, tree, c, budgets, mode, seed, out):
    """Rank users by influence and sample bot, cyborg and worker accounts."""
    g = load_graph(graph)
    if mode == "tree" and tree is None:
        raise ConfigurationError("--tree is required in tree mode")
    t = EncodingTree.from_dict(_read_json(tree), g) if tree is not None else None
    groups = categorize(g, t, c, Budgets.parse(budgets), seed, mode=mode)
    groups.save(out)
    click.echo(f"{len(groups.bots)} bots, {len(groups.cyborgs)} cyborgs, {len(groups.workers)} workers -> {out}")


@main.command("train-detector")
@click.option("--graph", type=_existing, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--epochs", type=int, default=None)
@click.option("--hidden", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@click.option("--optimizer", type=click.Choice(["sgd", "adam"]), default=None)
@click.option("--out", type=_output, required=True, help="Model JSON to write")
@_handle_errors
def train_detector(graph, seed, epochs, hidden, learning_rate, optimizer, out):
    """Train the detector on the training split of the graph."""
    overrides = {"epochs": epochs, "hidden": hidden, "learning_rate": learning_rate, "optimizer": optimizer}
    hp = DetectorHyperparams.model_validate({k: v for k, v in overrides.items() if v is not None})
    model, report = train(load_graph(graph), hp, seed)
    model.save(out)
    click.echo(json.dumps({"test_accuracy": report.test_accuracy, "test_f1": report.test_f1}, sort_keys=True))


@main.command()
@click.option("--graph", type=_existing, required=True)
@click.option("--tree", type=_existing, required=True)
@click.option("--groups", type=_existing, required=True)
@click.option("--model", type=_existing, required=True)
@click.option(
    "--targets",
    "targets_file",
    type=_existing,
    default=None,
    help="File with one target post id per line (default: held-out posts of --label)",
)
@click.option("--label", type=click.Choice(["fake", "real"]), default="fake", show_default=True)
@click.option("--method", type=click.Choice([MAIN_ATTACK, "random", "dice"]), default=MAIN_ATTACK, show_default=True)
@click.option("--t-max", type=int, default=None, help="Steps per episode (default: total budget)")
@click.option("--t-up", type=int, default=10, show_default=True, help="Target table sync period")
@click.option("--episodes", type=int, default=30, show_default=True)
@click.option("--community-level", "k", type=int, default=None, help="Community level k (default: K - 1)")
@click.option("--strategies", default="direct,indirect,feedback", show_default=True)
@click.option("--agents", default="bot,cyborg,worker", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=_output, required=True, help="Attack result JSON to write")
@_handle_errors
def attack(graph, tree, groups, model, targets_file, label, method, t_max, t_up, episodes, k, strategies, agents, seed, out):
    """Attack a frozen detector with the learned agents or a baseline."""
    g, t, account_groups, detector = _load_inputs(graph, tree, groups, model)
    black_box = detector if detector.frozen else detector.freeze()
    chosen = _targets(g, detector, targets_file, label)
    steps = t_max if t_max is not None else account_groups.budgets.total
    if method == MAIN_ATTACK:
        result = run_attack(
            g, t, account_groups, black_box, chosen, steps, t_up, episodes, seed,
            strategies=_strategies(strategies), agents=_agents(agents), k=k, progress=get_settings().progress,
        )
    else:
        result = baseline_attack(method, g, account_groups, black_box, chosen, steps, seed, _agents(agents))
    write_json(out, result.to_dict())
    click.echo(f"{result.attack}: success rate {result.success_rate:.3f} on {len(chosen)} targets -> {out}")


@main.command()
@click.option("--graph", type=_existing, required=True)
@click.option("--tree", type=_existing, required=True)
@click.option("--groups", type=_existing, required=True)
@click.option("--model", type=_existing, required=True, help="Trained (unfrozen) model JSON")
@click.option("--label", type=click.Choice(["fake", "real"]), default="fake", show_default=True)
@click.option("--t-max", type=int, default=None)
@click.option("--episodes", type=int, default=30, show_default=True)
@click.option("--refine-epochs", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=_output, required=True, help="Refined model JSON to write")
@_handle_errors
def defend(graph, tree, groups, model, label, t_max, episodes, refine_epochs, seed, out):
    """Collect attack edges on training posts and refine the detector with them."""
    g, t, account_groups, detector = _load_inputs(graph, tree, groups, model)
    if detector.split is None:
        raise ConfigurationError("model has no stored split")
    black_box = detector if detector.frozen else detector.freeze()
    steps = t_max if t_max is not None else account_groups.budgets.total
    hp = detector.hyperparams
    if refine_epochs is not None:
        hp = hp.model_copy(update={"refine_epochs": refine_epochs})
    edges = collect_manipulations(
        g, t, account_groups, black_box, select_targets(g, detector.split, label, "train"), steps, seed,
        AttackHyperparams(episodes=episodes),
    )
    refined = refine_with_attacks(detector, g, edges, hp, seed)
    refined.save(out)
    before, _ = evaluate(black_box, g, detector.split.test)
    after, _ = evaluate(refined, g, detector.split.test)
    click.echo(f"{len(edges)} manipulated edges; test accuracy {before:.3f} -> {after:.3f}; model -> {out}")


@main.command()
@click.option("--config", "config_path", type=_existing, required=True, help="Experiment config JSON")
@click.option("--output-dir", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.option("--workers", type=int, default=1, show_default=True, help="Seeds run concurrently")
@click.option(
    "--sweep",
    type=click.Choice(["none", "height", "strategy", "agents", "accounts"]),
    default="none",
    show_default=True,
    help="height: tree heights; strategy: strategy subsets; agents: each agent alone; accounts: per-agent account counts",
)
@click.option("--heights", default="2,3,4", show_default=True, help="Heights for --sweep height")
@click.option("--accounts", default="1,2,4,8", show_default=True, help="Account counts for --sweep accounts")
@_handle_errors
def run(config_path, output_dir, workers, sweep, heights, accounts):
    """Run the full pipeline for every seed and write the report."""
    config = load_experiment_config(config_path)
    if output_dir is not None:
        config = config.model_copy(update={"output_dir": output_dir})
    if sweep == "height":
        reports = run_height_sweep(config, _int_list(heights, "heights"))
        click.echo(", ".join(f"K={h}: {r.success_rate(MAIN_ATTACK):.3f}" for h, r in reports.items()))
        return
    if sweep == "strategy":
        reports = run_strategy_ablation(config)
        click.echo(", ".join(f"{name}: {r.success_rate(MAIN_ATTACK):.3f}" for name, r in reports.items()))
        return
    if sweep == "agents":
        reports = run_agent_ablation(config)
        click.echo(", ".join(f"{name}: {r.success_rate(MAIN_ATTACK):.3f}" for name, r in reports.items()))
        return
    if sweep == "accounts":
        sweep_reports = run_account_sweep(config, _int_list(accounts, "accounts"))
        click.echo(
            ", ".join(f"{a}x{n}: {r.success_rate(MAIN_ATTACK):.3f}" for (a, n), r in sweep_reports.items())
        )
        return
    report = run_experiment(config, workers=workers)
    for cell in report.ordered_cells():
        click.echo(f"{cell.attack:>10} {cell.phase:>8} {cell.mean:.3f} ± {cell.std:.3f}")
    click.echo(f"report -> {config.output_dir}")


@main.command()
@click.option("--input", "input_path", type=_existing, required=True, help="report.json from a previous run")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True, help="Output directory")
@_handle_errors
def report(input_path, out):
    """Re-emit CSV tables and plot data from a report JSON."""
    metrics = MetricsReport.from_dict(_read_json(input_path))
    files = emit_report(metrics, out)
    click.echo(f"{len(files)} files -> {out}")


if __name__ == "__main__":
    main()
