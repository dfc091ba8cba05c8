"""Delimited report files, JSON outputs, manifests, and the figures
rendered alongside them.

CSV files are comma-separated ASCII with a header row and LF endings.
JSON files are UTF-8 with sorted keys.  Every report path can also render
a PNG figure next to its data file; rendering is additive and nothing
downstream depends on it.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import platform
import time

from . import __version__
from .heuristics import HeuristicConstants, moment_exponent, predict
from .sweep import MassFunctionTable, MomentReport


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_moments_csv(path, report: MomentReport) -> None:
    rows = [[report.x, r.k, r.raw, r.falling, r.nondiagonal, r.predicted, r.ratio]
            for r in report.rows]
    _write_csv(path, ["x", "k", "raw", "falling", "nondiagonal", "predicted", "ratio"], rows)


def write_massfn_csv(path, table: MassFunctionTable,
                     constants: HeuristicConstants | None = None) -> None:
    rows = []
    for r, count in table.rows.items():
        pred = None
        if table.x >= 16:
            if r == 1:
                pred = predict("N1", x=table.x)
            elif r == 2:
                pred = predict("N2", x=table.x, constants=constants)
            else:
                pred = predict("Nr", x=table.x, r=r, constants=constants)
        ratio = count / pred if pred else None
        rows.append([table.x, r, count, pred, ratio])
    _write_csv(path, ["x", "r", "N_r", "predicted", "ratio"], rows)


def write_omega_csv(path, x: int, counts: dict[int, int]) -> None:
    rows = [[x, m, c] for m, c in sorted(counts.items())]
    _write_csv(path, ["x", "m", "count"], rows)


def write_singular_csv(path, rows: list[dict]) -> None:
    table = [[r["N"], r["k"], r["tuple_id"], r["value"], r["cutoff"],
              r["tail_bound"], r["admissible"]] for r in rows]
    _write_csv(path, ["N", "k", "tuple_id", "value", "cutoff", "tail_bound", "admissible"],
               table)


def write_fk_csv(path, rows: list[dict]) -> None:
    table = [[r["N"], r["k"], r["tuple_id"], r["z"], r["f_k"], r["f_k_star"],
              r.get("sieve_ratio")] for r in rows]
    _write_csv(path, ["N", "k", "tuple_id", "z", "f_k", "f_k_star", "sieve_ratio"], table)


def write_constants_json(path, constants: HeuristicConstants, k_max: int = 14) -> None:
    doc = constants.as_dict()
    doc["moment_exponents"] = {str(k): moment_exponent(k) for k in range(1, k_max + 1)}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_exponents_csv(path, k_max: int = 14) -> None:
    _write_csv(path, ["k", "exponent"], [[k, moment_exponent(k)] for k in range(1, k_max + 1)])


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, command: str, config: dict, files: list[str],
                   wall_time: float) -> str:
    doc = {
        "command": command,
        "config": config,
        "versions": {"pslab": __version__, "python": platform.python_version()},
        "wall_time_s": round(wall_time, 3),
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "files": {name: sha256_file(os.path.join(out_dir, name)) for name in sorted(files)},
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_moments(report: MomentReport, path) -> None:
    plt = _plt()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ks = [r.k for r in report.rows]
    ax1.semilogy(ks, [max(r.raw, 1) for r in report.rows], "o-", label="raw")
    ax1.semilogy(ks, [max(r.falling, 1) for r in report.rows], "s--", label="falling")
    ax1.set_xlabel("k")
    ax1.set_ylabel("moment value")
    ax1.set_title(f"power moments at x={report.x:g}")
    ax1.legend()
    ratios = [(r.k, r.ratio) for r in report.rows if r.ratio is not None]
    if ratios:
        ax2.plot([k for k, _ in ratios], [v for _, v in ratios], "o-")
        ax2.axhline(1.0, color="gray", lw=0.8)
    ax2.set_xlabel("k")
    ax2.set_ylabel("raw / predicted")
    ax2.set_title("ratio to main term")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_massfn(table: MassFunctionTable, path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    rs = sorted(table.rows)
    ax.semilogy(rs, [table.rows[r] for r in rs], "o-")
    ax.set_xlabel("r")
    ax.set_ylabel("N_r(x)")
    ax.set_title(f"mass function at x={table.x:g}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_omega(x: int, counts: dict[int, int], path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ms = sorted(counts)
    ax.bar(ms, [counts[m] for m in ms])
    if x >= 16:
        ll = math.log(math.log(x))
        shape = [x / math.log(x) * (0.5 * ll) ** (m - 1) / math.factorial(m - 1)
                 if m >= 1 else None for m in ms]
        pts = [(m, s) for m, s in zip(ms, shape) if s]
        if pts:
            ax.plot([m for m, _ in pts], [s for _, s in pts], "r.-", label="heuristic shape")
            ax.legend()
    ax.set_xlabel("distinct odd prime factors")
    ax.set_ylabel("count")
    ax.set_title(f"class-M census at x={x:g}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_singular(rows: list[dict], path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    good = [r for r in rows if r["admissible"]]
    bad = [r for r in rows if not r["admissible"]]
    if good:
        ax.semilogy([r["N"] for r in good], [r["value"] for r in good], "o",
                    ms=4, label="admissible")
    if bad:
        ax.plot([r["N"] for r in bad], [1e-3 for _ in bad], "rx", ms=4,
                label="vanishing")
    ax.set_xlabel("N")
    ax.set_ylabel("singular series")
    ax.set_title("singular-series values over the corpus")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_fk(rows: list[dict], path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    by_tuple: dict[str, list[dict]] = {}
    for r in rows:
        by_tuple.setdefault(str(r["tuple_id"]), []).append(r)
    for tid, rs in sorted(by_tuple.items()):
        rs = sorted(rs, key=lambda r: r["z"])
        ax.loglog([r["z"] for r in rs], [max(r["f_k"], 1) for r in rs], "o-", label=f"tuple {tid}")
    ax.set_xlabel("z")
    ax.set_ylabel("f_k(z)")
    ax.set_title("sieving-pair counts")
    if by_tuple:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
