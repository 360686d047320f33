"""Headless experiment harness: unattended runs and detection matrices.

For every (version, seed) pair a scripted session runs a fixed number of
interaction events; the final populations are then scored with the seven
objectives and seven metrics and compared against the reference runs.
Independent runs may execute in parallel; seeding makes the resulting
matrices identical either way.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import DeParams
from .metrics import ReferenceModel, SaxParams, candidate_metrics, output_features
from .mutation import SutVersion
from .objectives import OBJECTIVE_TAGS
from .session import Session, SessionConfig
from .stats import DetectionReport, detect


@dataclass(frozen=True)
class LabPlan:
    versions: tuple[int, ...] | None = None  # None = every study version
    events: int = 10
    n_steps: int = 50
    seeds: tuple[int, ...] = tuple(range(1, 11))
    pop_size: int = 50
    trace_len: int = 50
    alpha: float = 0.05
    freeze_bounds: bool = False
    # "paper": one fitness evaluation per optimization step (events*n_steps
    # evaluations per run, the protocol's published effort level); "generational":
    # every step evaluates a full trial population. At generational effort
    # the search converges to a version-independent optimum and the
    # objective distributions stop discriminating mutants.
    effort: str = "paper"
    # optional per-event weight changes, e.g. {2: {"max.derivative": 1.0}}
    weight_schedule: dict[int, dict[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("need at least one seed")
        if self.effort not in ("paper", "generational"):
            raise ValueError("effort must be 'paper' or 'generational'")


@dataclass
class RunRecord:
    version_id: int
    seed: int
    genomes: np.ndarray
    inputs: np.ndarray  # [pop, 7, T]
    outputs: np.ndarray  # [pop, 3, T]
    raw_scores: np.ndarray  # [pop, 7]
    iterations: int
    evaluations: int
    log: dict


def _run_generational(version: SutVersion, seed: int, plan: LabPlan) -> RunRecord:
    config = SessionConfig(
        version_id=version.version_id,
        de=DeParams(pop_size=plan.pop_size, trace_len=plan.trace_len, seed=seed),
        n_steps=plan.n_steps,
        max_events=plan.events,
        freeze_bounds=plan.freeze_bounds,
    )
    session = Session(f"lab-v{version.version_id}-s{seed}", config, version)
    for k in range(plan.events):
        if k in plan.weight_schedule:
            session.set_weights(plan.weight_schedule[k])
        session.run_segment()
    pop = session.population
    return RunRecord(
        version_id=version.version_id,
        seed=seed,
        genomes=np.stack([c.genome for c in pop]),
        inputs=np.stack([c.inputs for c in pop]),
        outputs=np.stack([c.outputs for c in pop]),
        raw_scores=np.stack([c.raw_scores for c in pop]),
        iterations=session.iterations,
        evaluations=session.evaluations,
        log=session.stop(),
    )


def _run_paper_effort(version: SutVersion, seed: int, plan: LabPlan) -> RunRecord:
    """Unattended low-effort run: one fitness
    evaluation per optimization step, targets updated round-robin."""
    import itertools

    from . import engine
    from .objectives import NormalizationBounds, ObjectiveWeights

    params = DeParams(pop_size=plan.pop_size, trace_len=plan.trace_len, seed=seed)
    rng = np.random.default_rng(seed)
    ids = itertools.count()
    weights = ObjectiveWeights.equal()
    bounds = NormalizationBounds(frozen=plan.freeze_bounds)
    population = engine.init_population(params, rng, version, weights, bounds, ids)
    evaluations = params.pop_size
    iterations = 0
    for k in range(plan.events):
        if k in plan.weight_schedule:
            weights = ObjectiveWeights(dict(plan.weight_schedule[k]))
        for _ in range(plan.n_steps):
            j = iterations % params.pop_size
            evaluations += engine.step_single(
                population, j, weights, bounds, version, params, rng, ids,
                generation=iterations + 1,
            )
            iterations += 1
    return RunRecord(
        version_id=version.version_id,
        seed=seed,
        genomes=np.stack([c.genome for c in population]),
        inputs=np.stack([c.inputs for c in population]),
        outputs=np.stack([c.outputs for c in population]),
        raw_scores=np.stack([c.raw_scores for c in population]),
        iterations=iterations,
        evaluations=evaluations,
        log={
            "mode": "paper-effort",
            "version_id": version.version_id,
            "seed": seed,
            "events": plan.events,
            "n_steps": plan.n_steps,
            "weight_schedule": {str(k): v for k, v in plan.weight_schedule.items()},
            "counters": {"iterations": iterations, "evaluations": evaluations},
            "final_genomes": [c.genome.tolist() for c in population],
        },
    )


def _run_one(version: SutVersion, seed: int, plan: LabPlan) -> RunRecord:
    if plan.effort == "paper":
        return _run_paper_effort(version, seed, plan)
    return _run_generational(version, seed, plan)


def _worker(args):
    version, seed, plan = args
    try:
        return _run_one(version, seed, plan)
    except Exception as exc:  # surfaced by the caller, other runs proceed
        return (version.version_id, seed, str(exc))


def run_sessions(versions: list[SutVersion], plan: LabPlan,
                 jobs: int = 1) -> dict[tuple[int, int], RunRecord]:
    """Run every (version, seed) session; failures are recorded, not fatal."""
    tasks = [(v, s, plan) for v in versions for s in plan.seeds]
    records: dict[tuple[int, int], RunRecord] = {}
    failures: list[tuple[int, int, str]] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_worker, tasks))
    else:
        results = [_worker(t) for t in tasks]
    for (v, s, _), rec in zip(tasks, results):
        if isinstance(rec, RunRecord):
            records[(v.version_id, s)] = rec
        else:
            failures.append(rec)
    for vid, seed, msg in failures:
        print(f"run failed: version {vid} seed {seed}: {msg}")
    return records


def score_records(records: dict[tuple[int, int], RunRecord],
                  reference_id: int = 1,
                  sax: SaxParams | None = None) -> dict[int, list[dict[str, np.ndarray]]]:
    """Per-version, per-run score tables (objectives + metrics) keyed by tag."""
    sax = sax or SaxParams()
    ref_records = [r for (vid, _), r in sorted(records.items()) if vid == reference_id]
    if not ref_records:
        raise ValueError("no reference runs to fit the feature model on")
    ref_features = np.vstack([
        np.stack([output_features(rec.outputs[i, 2]) for i in range(rec.outputs.shape[0])])
        for rec in ref_records
    ])
    model = ReferenceModel.fit(ref_features)

    tables: dict[int, list[dict[str, np.ndarray]]] = {}
    for (vid, seed) in sorted(records):
        rec = records[(vid, seed)]
        pop = rec.outputs.shape[0]
        table: dict[str, np.ndarray] = {
            tag: rec.raw_scores[:, i].astype(np.float64)
            for i, tag in enumerate(OBJECTIVE_TAGS)
        }
        per_metric: dict[str, list[float]] = {}
        for i in range(pop):
            values = candidate_metrics(rec.inputs[i], rec.outputs[i], model, sax)
            for tag, val in values.items():
                per_metric.setdefault(tag, []).append(val)
        for tag, vals in per_metric.items():
            table[tag] = np.asarray(vals, dtype=np.float64)
        tables.setdefault(vid, []).append(table)
    return tables


def run_lab(plan: LabPlan, study: list[SutVersion], out_dir: str | Path | None = None,
            jobs: int = 1, verbose: bool = True) -> DetectionReport:
    """The full laboratory protocol: run, score, detect, persist."""
    by_id = {v.version_id: v for v in study}
    wanted = plan.versions or tuple(sorted(by_id))
    versions = [by_id[vid] for vid in wanted]
    if 1 not in by_id:
        raise ValueError("study set must include the reference version 1")
    if 1 not in wanted:
        versions = [by_id[1]] + versions

    records = run_sessions(versions, plan, jobs=jobs)
    tables = score_records(records, reference_id=1)

    reference_runs = tables[1]
    version_runs = {vid: tables[vid] for vid in wanted if vid != 1}
    if not version_runs:  # reference-only plan: compare the reference to itself
        version_runs = {1: tables[1]}
    report = detect(
        version_runs,
        reference_runs,
        alpha=plan.alpha,
        labels={v.version_id: v.label for v in study},
        categories={v.version_id: v.category for v in study},
    )

    if verbose:
        per_run = next(iter(records.values()))
        print(f"runs: {len(records)}  iterations/run: {per_run.iterations}  "
              f"candidate evaluations/run: {per_run.evaluations}")
        print(f"detected: {report.detected_ids()}")

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "detection.json").write_text(report.to_json())
        (out / "detection.csv").write_text(report.to_csv())
        runs_dir = out / "runs"
        runs_dir.mkdir(exist_ok=True)
        for (vid, seed), rec in sorted(records.items()):
            (runs_dir / f"v{vid:02d}_s{seed}.json").write_text(json.dumps(rec.log))
        iters = plan.events * plan.n_steps
        summary = {
            "plan": {
                "versions": list(wanted),
                "events": plan.events,
                "n_steps": plan.n_steps,
                "seeds": list(plan.seeds),
                "pop_size": plan.pop_size,
                "trace_len": plan.trace_len,
                "alpha": plan.alpha,
                "effort": plan.effort,
            },
            "iterations_per_run": iters,
            "evaluations_per_run": (
                plan.pop_size + iters if plan.effort == "paper"
                else plan.pop_size * (iters + 1)
            ),
            "detected": report.detected_ids(),
        }
        (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return report


def eval_layout(study: list[SutVersion]) -> list[dict]:
    """Blinded six-version layout: reference first, then one per category."""
    by_cat: dict[str, SutVersion] = {}
    for v in study:
        if v.category and v.category not in by_cat:
            by_cat[v.category] = v
    chosen = [next(v for v in study if v.version_id == 1)]
    chosen += [by_cat[c] for c in ("CVR", "IID", "ABR", "CBR", "LBR") if c in by_cat]
    return [
        {"blind_label": f"{i}_v{v.version_id}", "position": i, "version_id": v.version_id}
        for i, v in enumerate(chosen, start=1)
    ]


def run_interactive_eval(study: list[SutVersion], participant: str,
                         out_dir: str | Path) -> dict:
    """Write the per-participant evaluation scaffold (category-blinded labels)."""
    out = Path(out_dir) / f"participant_{participant}"
    out.mkdir(parents=True, exist_ok=True)
    layout = eval_layout(study)
    by_id = {v.version_id: v for v in study}
    manifest = {
        "participant": participant,
        "versions": [
            {"blind_label": e["blind_label"], "position": e["position"]} for e in layout
        ],
        "note": "run each version in order; the first is the training version",
    }
    # the answer key keeps the fault categories out of the participant's view
    key = [
        dict(e, category=by_id[e["version_id"]].category) for e in layout
    ]
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    (out / "answer_key.json").write_text(json.dumps({"layout": key}, indent=2))
    (out / "sessions").mkdir(exist_ok=True)
    return {"dir": str(out), "layout": layout}
