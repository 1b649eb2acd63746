"""Command-line experiment runner.

Usage::

    rismimo run --config scenario.yaml --experiment rate_vs_M --out results/

Each run writes ``<experiment>.csv`` with one row per (sweep value, user,
method) and ``<experiment>.manifest.json`` with the resolved configuration.
Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 NaN in results.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import rng as rng_mod
from .closed_form import aligned_phases, rate_closed_form, scaled_rate_limit
from .ga_opt import GaParams, optimize
from .mc_rate import RateReport, ergodic_rate_mc
from .scenario import ConfigError, ScenarioConfig, build_scenario, load_config
from .validation import oracle_suite

EXPERIMENTS = (
    "rate_vs_M",
    "power_scaling",
    "rate_vs_upsilon",
    "rate_vs_kappa",
    "rate_vs_eta",
    "rate_vs_bits",
    "discrete_vs_continuous",
    "optimize_only",
    "validate_mc",
)
METHODS = ("mc", "closed", "limit")
HEADER = ("sweep_param", "value", "user", "method", "rate_bps_hz", "stderr", "sum_rate")

DEFAULT_SWEEPS = {
    "rate_vs_M": [16, 36, 64, 100, 144],
    "power_scaling": [64, 256, 1024, 4096],
    "rate_vs_upsilon": [0, 0.5, 1, 2, 5, 10, 20, 50, 100, 1000],
    "rate_vs_kappa": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
    "rate_vs_eta": [k * math.pi / 12 for k in range(7)],
    "rate_vs_bits": list(range(1, 13)),
    "discrete_vs_continuous": list(range(1, 9)),
    "optimize_only": [0],
    "validate_mc": [10],
}
DEFAULT_METHODS = {
    "power_scaling": ["closed", "limit"],
    "discrete_vs_continuous": ["closed"],
    "optimize_only": ["closed"],
    "validate_mc": ["mc", "closed"],
}
HARDWARE_SWEEPS = {
    "rate_vs_upsilon": ("upsilon", float),
    "rate_vs_kappa": ("kappa", float),
    "rate_vs_eta": ("eta", float),
    "rate_vs_bits": ("bits", int),
}


@dataclass
class ExperimentSpec:
    """What to run and where to write it."""

    kind: str
    sweep: list[float]
    methods: list[str]
    out: Path
    phases: str = "ga"
    aligned_user: int = 0
    eps: list[float] = field(default_factory=lambda: [1.0, 1.4])
    E_u: float = 10.0
    ga: GaParams = field(default_factory=GaParams)
    sq_mode: str = "conditional"
    realizations: int | None = None
    threads: int = 1
    oracle_samples: int = 10**6

    def __post_init__(self):
        if self.kind not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.kind!r}")
        if not self.sweep:
            raise ConfigError("sweep must not be empty")
        if not self.methods or set(self.methods) - set(METHODS):
            raise ConfigError(f"methods must be a non-empty subset of {METHODS}")
        if self.phases not in ("random", "aligned", "ga"):
            raise ConfigError("phases must be random, aligned or ga")


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


class Runner:
    """Executes one :class:`ExperimentSpec` against a base scenario."""

    def __init__(self, scenario: ScenarioConfig, spec: ExperimentSpec):
        self.base = scenario
        self.spec = spec
        self.rows: list[tuple] = []
        self.extra: dict[str, list[tuple]] = {}

    # -- helpers ---------------------------------------------------------
    def phases_for(self, scenario: ScenarioConfig) -> np.ndarray:
        mode = self.spec.phases
        if mode == "random":
            return rng_mod.stream(scenario.seed, "phases").uniform(0.0, 2 * np.pi, scenario.N)
        if mode == "aligned":
            return aligned_phases(scenario, self.spec.aligned_user)
        return optimize(scenario, self.spec.ga).theta

    def report(self, scenario: ScenarioConfig, phases, method: str) -> RateReport:
        if method == "mc":
            return ergodic_rate_mc(scenario, phases, T=self.spec.realizations, sq_mode=self.spec.sq_mode,
                                   threads=self.spec.threads)
        if method == "closed":
            return rate_closed_form(scenario, phases)
        raise ConfigError(f"method {method!r} is not available for experiment {self.spec.kind}")

    def add(self, param: str, value, rep: RateReport):
        err = rep.mc_stderr if rep.mc_stderr is not None else [None] * len(rep.per_user_rate)
        for k, (r, e) in enumerate(zip(rep.per_user_rate, err)):
            self.rows.append((param, value, k, rep.method, r, e, rep.sum_rate))

    def methods(self, allowed=("mc", "closed")):
        bad = set(self.spec.methods) - set(allowed)
        if bad:
            raise ConfigError(f"methods {sorted(bad)} not available for {self.spec.kind}")
        return self.spec.methods

    # -- experiments -----------------------------------------------------
    def rate_vs_M(self):
        for M in self.spec.sweep:
            sc = self.base.replace(M=int(M))
            phases = self.phases_for(sc)
            for method in self.methods():
                self.add("M", int(M), self.report(sc, phases, method))

    def power_scaling(self):
        phases = self.phases_for(self.base)
        E_u = self.spec.E_u
        for eps in self.spec.eps:
            for M in self.spec.sweep:
                sc = self.base.replace(M=int(M), tx_power=E_u / float(M) ** eps)
                param = f"M;eps={eps:g}"
                for method in self.methods(("mc", "closed", "limit")):
                    if method == "limit":
                        lim = scaled_rate_limit(sc, phases, eps, E_u, "M_only")
                        self.add(param, int(M), RateReport(per_user_rate=lim, method="limit"))
                    else:
                        self.add(param, int(M), self.report(sc, phases, method))

    def hardware_sweep(self):
        name, cast = HARDWARE_SWEEPS[self.spec.kind]
        phases = self.phases_for(self.base)
        for v in self.spec.sweep:
            sc = self.base.replace(**{name: cast(v)})
            for method in self.methods():
                self.add(name, cast(v), self.report(sc, phases, method))

    def discrete_vs_continuous(self):
        ga = self.spec.ga
        cont = optimize(self.base, dataclasses.replace(ga, bits=None)).theta
        for method in self.methods():
            self.add("continuous", 0, self.report(self.base, cont, method))
        for B in self.spec.sweep:
            theta = optimize(self.base, dataclasses.replace(ga, bits=int(B))).theta
            for method in self.methods():
                self.add("B", int(B), self.report(self.base, theta, method))

    def optimize_only(self):
        res = optimize(self.base, self.spec.ga)
        for method in self.methods():
            self.add("generations", len(res.history), self.report(self.base, res.theta, method))
        self.extra["phases"] = [("n", "theta_rad")] + [(n, t) for n, t in enumerate(res.theta)]
        self.extra["history"] = [("generation", "best_sum_rate")] + [
            (g + 1, f) for g, f in enumerate(res.history)]

    def validate_mc(self):
        n = int(self.spec.sweep[0])
        rows = oracle_suite(n=n, samples=self.spec.oracle_samples, seed=self.base.seed)
        self.extra["oracle"] = [("config", "quantity", "k", "i", "closed", "mc", "stderr", "z")] + [
            (r.config, r.quantity, r.k, r.i, r.closed, r.mc, r.stderr, r.z) for r in rows]
        for r in rows:
            self.rows.append((f"{r.quantity}[{r.k},{r.i}]", r.config, r.k, "mc", r.mc, r.stderr, None))
            self.rows.append((f"{r.quantity}[{r.k},{r.i}]", r.config, r.k, "closed", r.closed, None, None))

    def run(self):
        kind = self.spec.kind
        if kind in HARDWARE_SWEEPS:
            self.hardware_sweep()
        else:
            getattr(self, kind)()
        return self.rows


def _has_nan(rows) -> bool:
    for row in rows:
        for x in row:
            if isinstance(x, (float, np.floating)) and math.isnan(x):
                return True
    return False


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([x if isinstance(x, str) else _fmt(x) for x in row])


def run(config_path, spec: ExperimentSpec, seed: int | None = None, argv=None) -> int:
    """Execute an experiment and write its CSV and manifest; return an exit code."""
    t0 = time.perf_counter()
    try:
        raw = load_config(config_path)
        if seed is not None:
            raw["seed"] = seed
        scenario = build_scenario(raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if spec.realizations is None:
        spec.realizations = scenario.mc_realizations
    spec.ga = dataclasses.replace(spec.ga, seed=scenario.seed)

    runner = Runner(scenario, spec)
    try:
        rows = runner.run()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if _has_nan(rows) or any(_has_nan(v[1:]) for v in runner.extra.values()):
        print("numeric failure: NaN in results", file=sys.stderr)
        return 3

    try:
        spec.out.mkdir(parents=True, exist_ok=True)
        _write_csv(spec.out / f"{spec.kind}.csv", HEADER, rows)
        for name, table in runner.extra.items():
            _write_csv(spec.out / f"{spec.kind}.{name}.csv", table[0], table[1:])
        manifest = {
            "tool": "rismimo",
            "version": __version__,
            "experiment": {
                **{k: v for k, v in dataclasses.asdict(spec).items() if k not in ("out", "ga")},
                "ga": {k: (None if isinstance(v, float) and math.isinf(v) else v)
                       for k, v in dataclasses.asdict(spec.ga).items()},
            },
            "config": scenario.to_dict(),
            "seed": scenario.seed,
            "argv": list(argv) if argv is not None else None,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "wall_time_s": round(time.perf_counter() - t0, 3),
        }
        (spec.out / f"{spec.kind}.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rismimo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one experiment")
    p.add_argument("--config", required=True, help="YAML or JSON scenario file")
    p.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    p.add_argument("--out", default="results", type=Path, help="output directory (default: results)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--realizations", type=int, help="Monte Carlo realizations (default: from config)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for Monte Carlo")
    p.add_argument("--sweep", type=_float_list, help="comma-separated sweep values")
    p.add_argument("--methods", help="comma-separated subset of mc,closed,limit")
    p.add_argument("--phases", choices=("random", "aligned", "ga"), default="ga",
                   help="RIS phase choice (default: ga)")
    p.add_argument("--aligned-user", type=int, default=0)
    p.add_argument("--eps", type=_float_list, default=[1.0, 1.4], help="power-scaling exponents")
    p.add_argument("--eu", type=float, default=10.0, help="power-scaling reference power in watts")
    p.add_argument("--sq-mode", choices=("conditional", "marginal"), default="conditional")
    p.add_argument("--generations", type=int, default=2000, help="GA generation limit")
    p.add_argument("--population", type=int, default=200, help="GA population size")
    p.add_argument("--elites", type=int, default=10, help="GA elite count")
    p.add_argument("--ga-bits", type=int, help="discrete phase resolution for --phases ga")
    p.add_argument("--oracle-samples", type=int, default=10**6)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    try:
        ga = GaParams(N_tot=args.population, N_e=args.elites, t_T=args.generations, bits=args.ga_bits)
        methods = (args.methods.split(",") if args.methods
                   else DEFAULT_METHODS.get(args.experiment, ["mc", "closed"]))
        spec = ExperimentSpec(
            kind=args.experiment,
            sweep=args.sweep if args.sweep is not None else DEFAULT_SWEEPS[args.experiment],
            methods=[m.strip() for m in methods],
            out=args.out,
            phases=args.phases,
            aligned_user=args.aligned_user,
            eps=args.eps,
            E_u=args.eu,
            ga=ga,
            sq_mode=args.sq_mode,
            realizations=args.realizations,
            threads=args.threads,
            oracle_samples=args.oracle_samples,
        )
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(args.config, spec, seed=args.seed, argv=argv)


if __name__ == "__main__":
    sys.exit(main())
