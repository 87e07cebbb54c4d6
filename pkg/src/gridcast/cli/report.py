"""Render report artifacts (radar, size-sweep, timing) from a run directory.

Reads back whatever a `cv-bench` or `benchmark` run left behind and turns it
into CSV summaries and SVG charts. Refuses to run when nothing usable is
found so a typo'd path fails loudly instead of writing an empty report.
"""
from __future__ import annotations

import csv
from pathlib import Path

from ..crossval import TrialLedger, read_ledger_csv
from ..errors import MissingArtifacts
from . import svg

RADAR_HEADER = ["label", "mean_delta_mw", "std_delta_mw", "delta_at_best_mw",
                "seconds_per_trial"]
RADAR_AXES = ["mean delta (MW)", "std delta (MW)", "delta at best (MW)",
              "seconds / trial"]


def _radar_rows(ledgers: dict[str, TrialLedger]) -> list[list]:
    rows = []
    for label in sorted(ledgers):
        led = ledgers[label]
        rows.append([label, repr(float(led.mean_delta())),
                     repr(float(led.std_delta())),
                     repr(float(led.delta_at_best())),
                     repr(float(led.mean_seconds()))])
    return rows


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _render_radar(out: Path, ledgers: dict[str, TrialLedger]) -> list[str]:
    rows = _radar_rows(ledgers)
    _write_csv(out / "radar.csv", RADAR_HEADER, rows)
    series = [(row[0], [float(v) for v in row[1:]]) for row in rows]
    chart = svg.radar_chart(RADAR_AXES, series,
                            title="cross-validation scheme comparison")
    svg.save_svg(out / "charts" / "radar.svg", chart)
    return ["radar.csv", "charts/radar.svg"]


def _render_timing(out: Path, ledgers: dict[str, TrialLedger]) -> list[str]:
    rows = []
    for label in sorted(ledgers):
        led = ledgers[label]
        rows.append([led.scheme, led.model, len(led.rows),
                     repr(float(led.mean_seconds()))])
    _write_csv(out / "timing_table.csv",
               ["scheme", "model", "n_trials", "mean_seconds_per_trial"],
               rows)
    return ["timing_table.csv"]


def _render_size_sweeps(out: Path, sweeps: list[Path]) -> list[str]:
    series = []
    for path in sorted(sweeps):
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["size_days", "mean_abs_delta_mw",
                          "std_abs_delta_mw"]:
                raise MissingArtifacts(f"{path}: not a size-sweep file")
            recs = [(int(r[0]), float(r[1]), float(r[2])) for r in reader]
        label = path.stem.removeprefix("size_sweep_")
        series.append((label, [r[0] for r in recs], [r[1] for r in recs],
                       [r[2] for r in recs]))
    chart = svg.xy_chart(
        [(label, xs, ys) for label, xs, ys, _ in series],
        error_bars={label: errs for label, _, _, errs in series},
        title="|delta| vs training-window size",
        x_label="training days", y_label="|eps - eps_hat| (MW)")
    svg.save_svg(out / "charts" / "size_sweep.svg", chart)
    return ["charts/size_sweep.svg"]


def _render_predictions(out: Path, pred_files: list[Path]) -> list[str]:
    made = []
    for path in sorted(pred_files):
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            next(reader, None)
            recs = [(float(r[1]), float(r[2])) for r in reader]
        xs = list(range(len(recs)))
        slug = path.parent.name
        chart = svg.xy_chart(
            [("actual", xs, [a for a, _ in recs]),
             ("predicted", xs, [b for _, b in recs])],
            title=f"{slug}: predictions vs actual",
            x_label="test day", y_label="power (MW)")
        name = f"charts/{slug}_predictions.svg"
        svg.save_svg(out / name, chart)
        made.append(name)
    return made


def render_report(run_dir) -> list[str]:
    """Build every chart the run directory has data for; list what was made."""
    run_dir = Path(run_dir)
    out = run_dir
    ledger_files = sorted((run_dir / "ledgers").glob("*.csv")) \
        if (run_dir / "ledgers").is_dir() else []
    sweep_files = sorted(run_dir.glob("size_sweep_*.csv"))
    pred_files = sorted(run_dir.glob("runs/*/predictions.csv"))
    if not ledger_files and not sweep_files and not pred_files:
        raise MissingArtifacts(
            f"{run_dir}: no ledgers, size sweeps or predictions to report on")
    (out / "charts").mkdir(exist_ok=True)
    artifacts: list[str] = []
    if ledger_files:
        ledgers = {p.stem: read_ledger_csv(p) for p in ledger_files}
        artifacts += _render_radar(out, ledgers)
        artifacts += _render_timing(out, ledgers)
    if sweep_files:
        artifacts += _render_size_sweeps(out, sweep_files)
    if pred_files:
        artifacts += _render_predictions(out, pred_files)
    return artifacts
