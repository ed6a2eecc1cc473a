"""
End-to-end experiment pipeline.

Per seed: data -> tree -> categorize -> train -> attack -> defend -> re-attack.
Each phase draws its randomness from ``derive_seed(seed, phase)`` so a phase
can be replayed on its own, and any failure surfaces as ``PhaseError`` naming
the phase and the seed.
"""

import json
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from tqdm import tqdm

from selab.attack.baselines import baseline_attack
from selab.attack.engine import MAIN_ATTACK, AttackResult, collect_manipulations, run_attack
from selab.core.config_service import ExperimentConfig, StrategyToggles, get_settings
from selab.core.exceptions import ConfigurationError, PhaseError
from selab.core.logger_manager import get_logger, log_phase
from selab.core.seeding import derive_seed
from selab.detector.model import DetectorModel, PostSplit
from selab.detector.training import evaluate, refine_with_attacks, train
from selab.entropy.encoding_tree import EncodingTree
from selab.entropy.measures import one_dim_entropy, tree_entropy
from selab.entropy.optimizer import optimize_tree
from selab.graph.bipartite import FAKE, REAL, BipartiteGraph, unweighted
from selab.graph.io import load_graph, load_graph_csv
from selab.graph.synthetic import generate_synthetic
from selab.influence.categorize import AGENTS, AccountGroups, categorize

from .metrics import CLEAN, REFINED, MetricsReport, SeedRow
from .report import emit_report, emit_sweep, write_json

logger = get_logger(__name__)

BUDGET_FIELDS = {"bot": "bots", "cyborg": "cyborgs", "worker": "workers"}

STRATEGY_VARIANTS: Dict[str, StrategyToggles] = {
    "direct": StrategyToggles(direct=True, indirect=False, feedback=False),
    "indirect": StrategyToggles(direct=False, indirect=True, feedback=False),
    "feedback": StrategyToggles(direct=False, indirect=False, feedback=True),
    "all": StrategyToggles(),
}


@contextmanager
def _phase(name: str, seed: int, timings: Dict[str, float]) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    except PhaseError:
        raise
    except Exception as e:
        duration_ms = (time.perf_counter() - start) * 1000
        log_phase(logger, name, "error", duration_ms, seed=seed, error_type=type(e).__name__)
        raise PhaseError(name, seed, str(e), {"error_type": type(e).__name__}) from e
    duration_ms = (time.perf_counter() - start) * 1000
    timings[name] = duration_ms
    log_phase(logger, name, "success", duration_ms, seed=seed)


def load_data(config: ExperimentConfig, seed: int) -> BipartiteGraph:
    """Graph for ``seed``: synthetic graphs are regenerated per seed, files are loaded as-is."""
    if config.graph_path is not None:
        g = load_graph(config.graph_path)
    elif config.dataset is not None:
        g = load_graph_csv(config.dataset.edges_csv, config.dataset.labels_csv, config.dataset.features_csv)
    else:
        g = generate_synthetic(config.synthetic, derive_seed(seed, "data"))
    return g if config.weighted else unweighted(g)


def select_targets(g: BipartiteGraph, split: PostSplit, label: str, which: str) -> List[str]:
    """Posts of the target label in the chosen split, in graph order."""
    wanted = FAKE if label == "fake" else REAL
    pool = {"train": split.train, "heldout": split.heldout, "test": split.test, "all": g.post_ids}[which]
    members = set(pool)
    return [p for p in g.post_ids if p in members and g.label_of(p) == wanted]


def _attack_all(
    config: ExperimentConfig,
    g: BipartiteGraph,
    t: EncodingTree,
    groups: AccountGroups,
    model: DetectorModel,
    targets: Sequence[str],
    seed: int,
    phase: str,
) -> Dict[Tuple[str, str], AttackResult]:
    results = {
        (MAIN_ATTACK, phase): run_attack(
            g,
            t,
            groups,
            model,
            targets,
            config.t_max,
            config.attack.t_up,
            config.attack.episodes,
            derive_seed(seed, "attack", phase),
            config.attack,
            config.strategies,
            config.agents,
            config.community_level,
        )
    }
    for kind in config.baselines:
        results[(kind, phase)] = baseline_attack(
            kind, g, groups, model, targets, config.t_max, derive_seed(seed, "baseline", phase), config.agents
        )
    return results


def run_seed(config: ExperimentConfig, seed: int) -> Tuple[SeedRow, Dict[Tuple[str, str], AttackResult], Dict[str, float]]:
    """Run the full pipeline for one seed."""
    timings: Dict[str, float] = {}
    with _phase("data", seed, timings):
        g = load_data(config, seed)
    with _phase("tree", seed, timings):
        t = optimize_tree(g, config.height, config.tolerance)
        entropy = tree_entropy(g, t)
        baseline_entropy = one_dim_entropy(g)
    with _phase("categorize", seed, timings):
        groups = categorize(
            g, t, config.c, config.budgets, derive_seed(seed, "categorize"), mode=config.influence_mode
        )
    with _phase("train", seed, timings):
        model, _ = train(g, config.detector, derive_seed(seed, "train"))
        clean = model.freeze()
        clean_acc, clean_f1 = evaluate(clean, g, model.split.test)
        targets = select_targets(g, model.split, config.target_label, config.target_split)
        if not targets:
            logger.warning(f"No {config.target_label} targets in the {config.target_split} split for seed {seed}")
    with _phase("attack", seed, timings):
        results = _attack_all(config, g, t, groups, clean, targets, seed, CLEAN)

    refined_acc: Optional[float] = None
    refined_f1: Optional[float] = None
    edges: List[Tuple[str, str]] = []
    if config.defend:
        with _phase("defend", seed, timings):
            train_targets = select_targets(g, model.split, config.target_label, "train")
            edges = collect_manipulations(
                g,
                t,
                groups,
                clean,
                train_targets,
                config.t_max,
                derive_seed(seed, "defend"),
                config.attack,
                config.strategies,
                config.agents,
                config.community_level,
            )
            refined = refine_with_attacks(model, g, edges, config.detector, derive_seed(seed, "refine"))
            refined_acc, refined_f1 = evaluate(refined, g, model.split.test)
        with _phase("reattack", seed, timings):
            results.update(_attack_all(config, g, t, groups, refined, targets, seed, REFINED))

    row = SeedRow(
        seed=seed,
        targets=len(targets),
        tree_entropy=entropy,
        single_layer_entropy=baseline_entropy,
        clean_accuracy=clean_acc,
        clean_f1=clean_f1,
        refined_accuracy=refined_acc,
        refined_f1=refined_f1,
        manipulated_edges=len(edges),
        success={f"{attack}/{phase}": r.success_rate for (attack, phase), r in sorted(results.items())},
    )
    return row, results, timings


def run_experiment(
    config: ExperimentConfig, workers: int = 1, write: bool = True, progress: Optional[bool] = None
) -> MetricsReport:
    """Run every seed and aggregate the metrics; optionally write all artifacts."""
    progress = get_settings().progress if progress is None else progress
    report = MetricsReport(name=config.name, seeds=list(config.seeds))
    logger.info(f"Experiment '{config.name}' starting with {len(config.seeds)} seed(s)")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(lambda s: run_seed(config, s), config.seeds))
    else:
        outputs = [run_seed(config, s) for s in tqdm(config.seeds, desc="seeds", disable=not progress)]

    for row, results, timings in outputs:
        report.add_seed(row, results, timings)

    if write:
        out = Path(config.output_dir)
        emit_report(report, out)
        write_json(out / "config.json", json.loads(config.model_dump_json()))
        write_json(out / "timings.json", {str(seed): t for seed, t in report.timings.items()})
    logger.info(
        f"Experiment '{config.name}' finished: "
        + ", ".join(f"{c.attack}/{c.phase}={c.mean:.3f}" for c in report.ordered_cells())
    )
    return report


def _variant(config: ExperimentConfig, suffix: str, **updates) -> ExperimentConfig:
    doc = json.loads(config.model_dump_json())
    doc.update(updates)
    doc["name"] = f"{config.name}-{suffix}"
    doc["output_dir"] = str(Path(config.output_dir) / suffix)
    return ExperimentConfig.model_validate(doc)


def run_height_sweep(
    config: ExperimentConfig, heights: Sequence[int] = (2, 3, 4), write: bool = True
) -> Dict[int, MetricsReport]:
    """Main-attack success rate against the clean detector for every tree height."""
    reports = {}
    for height in heights:
        variant = _variant(config, f"K{height}", height=height, k=None, baselines=[], defend=False)
        reports[height] = run_experiment(variant, write=write)
    if write:
        emit_sweep({str(h): r for h, r in reports.items()}, Path(config.output_dir), "height")
    return reports


def run_strategy_ablation(
    config: ExperimentConfig, variants: Optional[Mapping[str, StrategyToggles]] = None, write: bool = True
) -> Dict[str, MetricsReport]:
    """Main-attack success rate for each enabled-strategy combination."""
    variants = variants or STRATEGY_VARIANTS
    reports = {}
    for name, toggles in variants.items():
        variant = _variant(config, name, strategies=toggles.model_dump(), baselines=[], defend=False)
        reports[name] = run_experiment(variant, write=write)
    if write:
        emit_sweep(reports, Path(config.output_dir), "strategy")
    return reports


def _single_agent(agent: str) -> Dict[str, bool]:
    return {name: name == agent for name in AGENTS}


def run_agent_ablation(config: ExperimentConfig, write: bool = True) -> Dict[str, MetricsReport]:
    """Main-attack success rate with each agent acting alone, next to all agents together."""
    reports = {}
    for agent in AGENTS:
        if getattr(config.budgets, BUDGET_FIELDS[agent]) == 0:
            logger.warning(f"Skipping single-{agent} variant: the {agent} budget is zero")
            continue
        variant = _variant(config, agent, agents=_single_agent(agent), baselines=[], defend=False)
        reports[agent] = run_experiment(variant, write=write)
    reports["all"] = run_experiment(_variant(config, "all", baselines=[], defend=False), write=write)
    if write:
        emit_sweep(reports, Path(config.output_dir), "agent")
    return reports


def run_account_sweep(
    config: ExperimentConfig,
    counts: Sequence[int] = (1, 2, 4, 8),
    agents: Sequence[str] = AGENTS,
    write: bool = True,
) -> Dict[Tuple[str, int], MetricsReport]:
    """Single-agent success rate as the number of controlled accounts grows.

    The episode length stays at the base config's ``t_max`` so every point
    has the same step budget.
    """
    attack = {**config.attack.model_dump(), "t_max": config.t_max}
    reports = {}
    for agent in agents:
        if agent not in AGENTS:
            raise ConfigurationError(f"unknown agent '{agent}'", {"agents": list(AGENTS)})
        for count in counts:
            budgets = {field_name: 0 for field_name in BUDGET_FIELDS.values()}
            budgets[BUDGET_FIELDS[agent]] = count
            variant = _variant(
                config,
                f"{agent}-{count}",
                budgets=budgets,
                agents=_single_agent(agent),
                attack=attack,
                baselines=[],
                defend=False,
            )
            reports[(agent, count)] = run_experiment(variant, write=write)
    if write:
        emit_sweep({f"{a}:{n}": r for (a, n), r in reports.items()}, Path(config.output_dir), "accounts")
    return reports
