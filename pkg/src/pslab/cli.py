"""Command-line front end.

Subcommands: sweep, singular, constants, fk, massfn, verify.  Numeric
arguments accept integer scientific notation ("1e8"); configuration
precedence is command line > config file > environment (PSLAB_CACHE_DIR,
PSLAB_THREADS) > defaults.  Report commands write CSV/JSON data files, a
manifest with content digests, and PNG figures beside the data (disable
with --no-plots).

Exit codes: 0 success, 1 criterion failure, 2 usage error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
import time
from dataclasses import dataclass

from . import heuristics, reports, tuples, verify
from .errors import ResourceLimitError
from .sweep import SweepConfig, cached_sweep, count_M_by_omega, mass_function, moment_report

_INT_SCI = re.compile(r"^(\d+)(?:[eE]\+?(\d+))?$")


def parse_int_sci(text: str) -> int:
    """Exact integer from '123' or '1e9'; fractional mantissas are rejected."""
    m = _INT_SCI.match(text.strip())
    if not m:
        raise ValueError(f"expected an integer (scientific notation allowed), got {text!r}")
    mantissa, expo = m.groups()
    return int(mantissa) * (10 ** int(expo) if expo else 1)


_DEFAULTS = {
    "x": 10**6,
    "kmax": 6,
    "cutoff": 10**6,
    "threads": None,     # resolved to cpu count at use
    "cache_dir": None,
    "out": "pslab-out",
    "seed": verify.DEFAULT_SEED,
}
_INT_KEYS = {"x", "kmax", "cutoff", "threads", "seed"}


def _read_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _DEFAULTS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = parse_int_sci(value) if key in _INT_KEYS else value
    return out


@dataclass
class RunConfig:
    command: str
    x: int
    kmax: int
    cutoff: int
    threads: int
    cache_dir: str | None
    out: str
    seed: int
    plots: bool = True
    quick: bool = False
    corpus: str | None = None
    sample: int = 25

    def echo(self) -> dict:
        return {
            "command": self.command, "x": self.x, "kmax": self.kmax,
            "cutoff": self.cutoff, "threads": self.threads,
            "cache_dir": self.cache_dir, "out": self.out, "seed": self.seed,
            "plots": self.plots, "quick": self.quick, "corpus": self.corpus,
            "sample": self.sample,
        }


def _resolve(args: argparse.Namespace) -> RunConfig:
    merged = dict(_DEFAULTS)
    if os.environ.get("PSLAB_CACHE_DIR"):
        merged["cache_dir"] = os.environ["PSLAB_CACHE_DIR"]
    if os.environ.get("PSLAB_THREADS"):
        merged["threads"] = parse_int_sci(os.environ["PSLAB_THREADS"])
    if getattr(args, "config", None):
        merged.update(_read_config_file(args.config))
    for key in _DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    threads = merged["threads"] or os.cpu_count() or 1
    for key in ("x", "kmax", "cutoff", "seed"):
        if merged[key] is None or merged[key] < 1:
            raise ValueError(f"{key} must be a positive integer")
    return RunConfig(
        command=args.command, x=merged["x"], kmax=merged["kmax"],
        cutoff=merged["cutoff"], threads=threads, cache_dir=merged["cache_dir"],
        out=merged["out"], seed=merged["seed"],
        plots=not getattr(args, "no_plots", False),
        quick=getattr(args, "quick", False),
        corpus=getattr(args, "corpus", None),
        sample=getattr(args, "sample", None) or 25,
    )


def _notice(msg: str) -> None:
    print(f"pslab: {msg}", file=sys.stderr)


def _finish(cfg: RunConfig, files: list[str], t0: float) -> None:
    reports.write_manifest(cfg.out, cfg.command, cfg.echo(), files, time.time() - t0)
    print(f"wrote {', '.join(sorted(files))} + manifest.json to {cfg.out}/")


def cmd_sweep(cfg: RunConfig, massfn_only: bool = False) -> int:
    t0 = time.time()
    os.makedirs(cfg.out, exist_ok=True)
    m = cached_sweep(SweepConfig(x=cfg.x, worker_count=cfg.threads,
                                 cache_dir=cfg.cache_dir), notice=_notice)
    constants = heuristics.euler_c_lambda(min(cfg.cutoff, 10**4))
    files = []
    table = mass_function(m)
    reports.write_massfn_csv(os.path.join(cfg.out, "massfn.csv"), table, constants)
    files.append("massfn.csv")
    if cfg.plots:
        reports.plot_massfn(table, os.path.join(cfg.out, "massfn.png"))
        files.append("massfn.png")
    if not massfn_only:
        rep = moment_report(m, cfg.kmax)
        reports.write_moments_csv(os.path.join(cfg.out, "moments.csv"), rep)
        files.append("moments.csv")
        omega = count_M_by_omega(cfg.x) if cfg.x >= 2 else {}
        reports.write_omega_csv(os.path.join(cfg.out, "omega.csv"), cfg.x, omega)
        files.append("omega.csv")
        if cfg.plots:
            reports.plot_moments(rep, os.path.join(cfg.out, "moments.png"))
            reports.plot_omega(cfg.x, omega, os.path.join(cfg.out, "omega.png"))
            files.extend(["moments.png", "omega.png"])
    _finish(cfg, files, t0)
    return 0


def _load_corpus(cfg: RunConfig) -> list[tuples.RepTuple]:
    if cfg.corpus:
        return tuples.read_corpus(cfg.corpus)
    _notice(f"no corpus given; sampling {cfg.sample} seeded tuples (seed {cfg.seed})")
    return tuples.sample_corpus(cfg.sample, cfg.seed)


def cmd_singular(cfg: RunConfig) -> int:
    t0 = time.time()
    os.makedirs(cfg.out, exist_ok=True)
    corpus = _load_corpus(cfg)
    rows = []
    for i, t in enumerate(corpus):
        cutoff = max(cfg.cutoff, 2 * t.k + 2)
        s = tuples.singular_series(t, cutoff)
        ok, _ = tuples.is_admissible(t)
        rows.append({"N": t.N, "k": t.k, "tuple_id": i, "value": s.value,
                     "cutoff": s.cutoff_prime, "tail_bound": s.tail_bound,
                     "admissible": ok})
    reports.write_singular_csv(os.path.join(cfg.out, "singular.csv"), rows)
    files = ["singular.csv"]
    if cfg.plots:
        reports.plot_singular(rows, os.path.join(cfg.out, "singular.png"))
        files.append("singular.png")
    _finish(cfg, files, t0)
    return 0


def cmd_constants(cfg: RunConfig) -> int:
    t0 = time.time()
    os.makedirs(cfg.out, exist_ok=True)
    constants = heuristics.euler_c_lambda(cfg.cutoff)
    reports.write_constants_json(os.path.join(cfg.out, "constants.json"), constants)
    reports.write_exponents_csv(os.path.join(cfg.out, "exponents.csv"))
    files = ["constants.json", "exponents.csv"]
    print(f"rho = {constants.rho:.6f}, kappa_tilde = {constants.kappa_tilde:.6f} "
          f"at {constants.prime_cutoff} primes (sensitivity {constants.sensitivity:.2e})")
    if cfg.plots:
        _plot_phi_profiles(os.path.join(cfg.out, "phi.png"), constants)
        files.append("phi.png")
    _finish(cfg, files, t0)
    return 0


def _plot_phi_profiles(path: str, constants) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ts = [i / 64 for i in range(65)]
    for r in range(3, 7):
        vals = [heuristics.phi_r(r, t, kappa_tilde=constants.kappa_tilde).value
                for t in ts]
        ax.plot(ts, vals, label=f"r={r}")
    ax.set_xlabel("t")
    ax.set_ylabel("phi_r(t)")
    ax.set_title("periodic mass-function profiles")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_fk(cfg: RunConfig) -> int:
    t0 = time.time()
    os.makedirs(cfg.out, exist_ok=True)
    corpus = _load_corpus(cfg)
    zs = sorted({max(cfg.x // 4, 100), max(cfg.x // 2, 100), max(cfg.x, 100)})
    rows = []
    for i, t in enumerate(corpus):
        s = tuples.singular_series(t, max(10**4, 2 * t.k + 2))
        for z in zs:
            fk = tuples.count_fk(z, t)
            fk_star = tuples.count_fk(z, t, star=True)
            ratio = None
            if s.value > 0 and z >= 3:
                import math as _math

                ratio = fk * _math.log(z) ** (2 * t.k + 1) / (s.value * z)
            rows.append({"N": t.N, "k": t.k, "tuple_id": i, "z": z,
                         "f_k": fk, "f_k_star": fk_star, "sieve_ratio": ratio})
    reports.write_fk_csv(os.path.join(cfg.out, "fk.csv"), rows)
    files = ["fk.csv"]
    if cfg.plots:
        reports.plot_fk(rows, os.path.join(cfg.out, "fk.png"))
        files.append("fk.png")
    _finish(cfg, files, t0)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    results = verify.run_all(quick=cfg.quick, workers=cfg.threads, seed=cfg.seed,
                             progress=print)
    failures = verify.hard_failures(results)
    n_pass = sum(1 for r in results if r.passed)
    print(f"\n{n_pass}/{len(results)} criteria passed"
          + (f"; {len(failures)} hard failure(s)" if failures else ""))
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pslab",
        description="counting laboratory for sums of two prime squares")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--x", type=parse_int_sci, default=None,
                       help="sweep bound / z bound (integer, 1e8 form allowed)")
        p.add_argument("--kmax", type=parse_int_sci, default=None,
                       help="largest moment order to report")
        p.add_argument("--cutoff", type=parse_int_sci, default=None,
                       help="prime count (constants) or prime bound (singular series)")
        p.add_argument("--threads", type=parse_int_sci, default=None,
                       help="worker processes for sweeps")
        p.add_argument("--cache-dir", dest="cache_dir", default=None,
                       help="directory for map caches")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=parse_int_sci, default=None,
                       help="seed for corpus sampling")
        p.add_argument("--config", default=None, help="key=value configuration file")
        p.add_argument("--no-plots", action="store_true", help="skip figure rendering")

    for name, descr in (("sweep", "prime-pair sweep with moment/mass-function reports"),
                        ("massfn", "mass-function table from the sweep cache"),
                        ("singular", "singular series over a tuple corpus"),
                        ("constants", "heuristic constants and exponent table"),
                        ("fk", "sieving-pair counts over a tuple corpus"),
                        ("verify", "run the acceptance criteria")):
        p = sub.add_parser(name, help=descr)
        add_common(p)
        if name in ("singular", "fk"):
            p.add_argument("--corpus", default=None,
                           help="tuple corpus file (default: seeded sample)")
            p.add_argument("--sample", type=parse_int_sci, default=None,
                           help="tuples to sample when no corpus is given")
        if name == "verify":
            p.add_argument("--quick", action="store_true",
                           help="subset of criteria that completes in under a minute")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
    except (ValueError, OSError) as exc:
        print(f"pslab: {exc}", file=sys.stderr)
        return 2
    try:
        if cfg.command == "sweep":
            return cmd_sweep(cfg)
        if cfg.command == "massfn":
            return cmd_sweep(cfg, massfn_only=True)
        if cfg.command == "singular":
            return cmd_singular(cfg)
        if cfg.command == "constants":
            return cmd_constants(cfg)
        if cfg.command == "fk":
            return cmd_fk(cfg)
        if cfg.command == "verify":
            return cmd_verify(cfg)
        raise AssertionError(f"unhandled command {cfg.command}")
    except ResourceLimitError as exc:
        print(f"pslab: resource limit: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"pslab: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
