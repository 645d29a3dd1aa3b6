"""Result files (CSV / JSON) and matplotlib figures."""

from __future__ import annotations

import csv
import json
from dataclasses import astuple, fields
from pathlib import Path

from .experiments import Aggregate, ExperimentResult, ResultRow

RAW_HEADER = [f.name for f in fields(ResultRow)]
AGG_HEADER = [f.name for f in fields(Aggregate)]


def _fmt(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".17g")
    if hasattr(value, "item"):  # numpy scalar
        return _fmt(value.item())
    return str(value)


def agg_path(path) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}_agg{path.suffix}")


def _write_csv(path, header, records):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in records:
            writer.writerow([_fmt(v) for v in astuple(rec)])


def _json_value(value):
    text = _fmt(value)
    if isinstance(value, str):
        return json.dumps(value)
    return text


def _write_json(path, header, records):
    # hand-rolled so floats keep exactly 17 significant digits
    lines = []
    for rec in records:
        items = ", ".join(f"{json.dumps(k)}: {_json_value(v)}" for k, v in zip(header, astuple(rec)))
        lines.append("  {" + items + "}")
    body = ",\n".join(lines)
    with open(path, "w") as fh:
        fh.write("[\n" + body + "\n]\n" if lines else "[]\n")


def write_results(result: ExperimentResult, path, fmt="csv", emit_raw=True):
    """Write raw rows to ``path`` and aggregates to ``<stem>_agg<suffix>``.

    Returns the list of files written.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    writer = _write_csv if fmt == "csv" else _write_json
    written = []
    if emit_raw:
        writer(path, RAW_HEADER, result.rows)
        written.append(path)
    apath = agg_path(path)
    writer(apath, AGG_HEADER, result.aggregates)
    written.append(apath)
    return written


def _coerce(row, header, cls):
    out = {}
    for f in fields(cls):
        val = row[f.name]
        if f.type in ("int", int):
            out[f.name] = int(val)
        elif f.type in ("float", float):
            out[f.name] = float(val)
        else:
            out[f.name] = val
    return cls(**out)


def read_results(path, fmt="csv"):
    """Read rows written by :func:`write_results`; returns ResultRow or Aggregate records."""
    path = Path(path)
    if fmt == "csv":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames
            records = list(reader)
    else:
        with open(path) as fh:
            records = json.load(fh)
        header = list(records[0]) if records else []
    cls = Aggregate if header == AGG_HEADER or path.stem.endswith("_agg") else ResultRow
    return [_coerce(r, header, cls) for r in records]


def summary_lines(result: ExperimentResult):
    lines = [f"{'method':<12} {'sweep':>6} {'mean_loss':>10} {'mean_dB':>9} {'stderr':>9} {'count':>6}"]
    for a in result.aggregates:
        lines.append(f"{a.method:<12} {a.sweep_value:>6d} {a.mean_loss:>10.4f} "
                     f"{a.mean_loss_db:>9.3f} {a.stderr_loss:>9.2e} {a.count:>6d}")
    skipped = sum(result.skipped.values())
    detail = ", ".join(f"{k}={v}" for k, v in sorted(result.skipped.items()))
    lines.append(f"skipped trials: {skipped}" + (f" ({detail})" if detail else ""))
    lines.append(f"elapsed: {result.elapsed:.2f} s")
    return lines


def plot_result(result: ExperimentResult, path):
    """Render the figure matching ``result.experiment`` to ``path`` (format from suffix)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    fig, ax = plt.subplots(figsize=(6, 4))
    methods = list(dict.fromkeys(r.method for r in result.rows))
    exp = result.experiment
    if exp == "omega-study":
        for m in methods:
            rows = [r for r in result.rows if r.method == m]
            ax.plot([r.trial_index for r in rows], [r.loss_db for r in rows], ".", label=m)
        ax.set_xlabel("index of Omega")
        ax.set_ylabel("average SNR loss (dB)")
    elif exp in ("distribution", "single"):
        for m in methods:
            if m == "clairvoyant":
                continue
            vals = result.losses(m, db=True)
            line = ax.hist(vals, bins=40, density=True, histtype="step", label=m)[2][0]
            ax.axvline(vals.mean(), color=line.get_edgecolor(), linestyle="--")
        ax.set_xlabel("SNR loss (dB)")
        ax.set_ylabel("density")
    else:
        label = "R" if exp == "sweep-r" else "K"
        for a_method in methods:
            if a_method == "clairvoyant":
                continue
            aggs = [a for a in result.aggregates if a.method == a_method]
            if exp == "sweep-r" and a_method == "mn":
                ax.axhline(aggs[0].mean_loss_db, color="k", linestyle=":", label="mn")
                continue
            xs = np.array([a.sweep_value for a in aggs])
            ax.plot(xs, [a.mean_loss_db for a in aggs], "o-", ms=3, label=a_method)
        ax.set_xlabel(label)
        ax.set_ylabel("average SNR loss (dB)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
