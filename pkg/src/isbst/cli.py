"""Command-line entry points: mutants, lab, serve, eval."""

from __future__ import annotations

import sys
import click

from .lab import LabPlan, eval_layout, run_interactive_eval, run_lab
from .mutation import DEFAULT_STUDY_SEED, load_study, save_study, study_set


def _parse_seeds(text: str) -> tuple[int, ...]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(p) for p in text.split(",") if p)


def _parse_versions(text: str) -> tuple[int, ...] | None:
    if text.strip().lower() == "all":
        return None
    return tuple(int(p) for p in text.split(",") if p)


def _load_or_build_study(study_dir: str | None):
    if study_dir:
        return load_study(study_dir)
    return study_set(DEFAULT_STUDY_SEED)


@click.group()
def main():
    """Search-based testing workbench for the Time Ramp module."""


@main.command()
@click.option("--seed", default=DEFAULT_STUDY_SEED, show_default=True, type=int,
              help="seed for sampling the mutant sites")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="output directory")
def mutants(seed: int, out_dir: str):
    """Generate the 16-version study set (reference + 15 mutants)."""
    versions = study_set(seed)
    save_study(versions, out_dir)
    for v in versions:
        site = v.mutation.describe() if v.mutation else "reference"
        click.echo(f"{v.version_id:>2} {v.label:<4} {site}")
    click.echo(f"wrote {len(versions)} versions to {out_dir}")


@main.command()
@click.option("--versions", default="all", show_default=True,
              help="'all' or a comma list of version ids")
@click.option("--events", default=10, show_default=True, type=int)
@click.option("--steps", default=50, show_default=True, type=int)
@click.option("--seeds", default="1..10", show_default=True,
              help="'a..b' range or comma list")
@click.option("--pop", "pop_size", default=50, show_default=True, type=int)
@click.option("--ticks", default=50, show_default=True, type=int)
@click.option("--alpha", default=0.05, show_default=True, type=float)
@click.option("--effort", default="paper", show_default=True,
              type=click.Choice(["paper", "generational"]),
              help="one fitness evaluation per step, or a full trial population")
@click.option("--study", "study_dir", type=click.Path(exists=True),
              help="study directory (default: built-in seeded study set)")
@click.option("--jobs", default=1, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path())
def lab(versions, events, steps, seeds, pop_size, ticks, alpha, effort, study_dir, jobs, out_dir):
    """Run the unattended laboratory protocol and write detection matrices."""
    study = _load_or_build_study(study_dir)
    plan = LabPlan(
        versions=_parse_versions(versions),
        events=events,
        n_steps=steps,
        seeds=_parse_seeds(seeds),
        pop_size=pop_size,
        trace_len=ticks,
        alpha=alpha,
        effort=effort,
    )
    try:
        report = run_lab(plan, study, out_dir=out_dir, jobs=jobs)
    except Exception as exc:
        click.echo(f"lab failed: {exc}", err=True)
        sys.exit(1)
    expected = plan.versions or tuple(v.version_id for v in study)
    ran = [v.version_id for v in report.versions]
    missing = [vid for vid in expected if vid not in ran and vid != 1]
    if missing:
        click.echo(f"failed versions: {missing}", err=True)
        sys.exit(1)
    click.echo(f"wrote detection matrices to {out_dir}")


@main.command()
@click.option("--port", default=8741, show_default=True, type=int)
@click.option("--study", "study_dir", type=click.Path(exists=True),
              help="study directory (default: built-in seeded study set)")
@click.option("--ui", "ui_dir", type=click.Path(exists=True), help="static UI directory")
@click.option("--export", "export_dir", type=click.Path(), help="export directory")
@click.option("--blind", is_flag=True, help="serve the six-version blinded layout")
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port, study_dir, ui_dir, export_dir, blind, host):
    """Serve the session protocol (and the UI, if built) over WebSocket."""
    from .server import serve as run_server

    study = _load_or_build_study(study_dir)
    labels = None
    if blind:
        layout = eval_layout(study)
        keep = {e["version_id"] for e in layout}
        labels = {e["version_id"]: e["blind_label"] for e in layout}
        study = [v for v in study if v.version_id in keep]
    click.echo(f"serving {len(study)} versions on ws://{host}:{port}/ws")
    run_server(study, port=port, export_dir=export_dir, ui_dir=ui_dir,
               labels=labels, host=host)


@main.command("eval")
@click.option("--study", "study_dir", type=click.Path(exists=True))
@click.option("--participant", required=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def eval_cmd(study_dir, participant, out_dir):
    """Prepare the blinded six-version on-site evaluation scaffold."""
    study = _load_or_build_study(study_dir)
    result = run_interactive_eval(study, participant, out_dir)
    for entry in result["layout"]:
        click.echo(f"{entry['position']}: {entry['blind_label']}")
    click.echo(f"scaffold in {result['dir']}")


if __name__ == "__main__":
    main()
