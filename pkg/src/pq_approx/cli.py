"""Configuration-driven experiment harness.

Usage: pq-approx <command> [--config FILE] [--out DIR] [--mode float|rational]
                 [--resolution N] [--threads N]

Commands run sweeps and checks from the library and write deterministic CSV:
identical configuration produces byte-identical files, whatever the thread
count, because all work items are pure and results are assembled in config
order.  Mathematical discrepancies never affect the exit status; they land in
discrepancies.csv, which every command writes alongside its own tables.
Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import bivariate as biv
from .functions import resolve
from .operators import (
    VARIANT_ORACLE,
    VARIANT_PRINTED,
    bbh_pq,
    brute_force_moment,
    moment_closed,
)
from .pq_core import (
    DomainError,
    MODES,
    PQParams,
    euler_product,
    euler_sum,
    pq_integer,
    pq_integers,
)
from .rates import delta_n, rate_bound_check, u_grid
from .reporting import CSV_HEADER, build_catalogue
from .statistical import (
    korovkin_battery,
    natural_density,
    schedule_arrays,
    st_limit_check,
)

COMMANDS = ("moments", "korovkin", "rates", "bivariate", "density", "identities")


class ConfigError(Exception):
    pass


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])


def emit_plot_data(path: Path, series_rows: Iterable[Sequence]) -> None:
    """Write (series, x, y) rows for external plotting tools."""
    _write_csv(path, ("series", "x", "y"), series_rows)


def deterministic_map(fn: Callable, items: Sequence, threads: int) -> List:
    """Apply fn to items, optionally in a thread pool, preserving item order.

    Results are collected in input order, so the thread count cannot change
    any output.
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _parse_number(value, mode: str):
    if isinstance(value, str):
        number = Fraction(value)
    elif isinstance(value, (int, float)):
        number = Fraction(value)
    else:
        raise ConfigError(f"cannot read a number from {value!r}")
    return number if mode == "rational" else float(number)


def _params(section: dict, mode: str, default_p: str, default_q: str) -> PQParams:
    p = _parse_number(section.get("p", default_p), mode)
    q = _parse_number(section.get("q", default_q), mode)
    return PQParams(p, q, mode=mode)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_moments(cfg: dict, out: Path, mode: str, resolution: int, threads: int) -> None:
    section = cfg.get("moments", {})
    ns = list(section.get("n_values", [1, 2, 3, 5, 10, 20, 50]))
    xs = [_parse_number(x, mode) for x in section.get("x_values", ["0", "1/2", "1", "2", "10"])]
    params = _params(section, mode, "9/10", "1/2")
    tasks = [(nu, n, x) for nu in (0, 1, 2) for n in ns for x in xs]

    def work(task):
        nu, n, x = task
        closed = moment_closed(nu, n, x, params, variant=VARIANT_ORACLE)
        printed = moment_closed(nu, n, x, params, variant=VARIANT_PRINTED)
        brute = brute_force_moment(nu, n, x, params)
        scale = max(abs(float(brute)), 1e-300)
        gap = abs(float(closed) - float(brute)) / scale
        return (nu, n, params.p, params.q, x, closed, printed, brute, gap)

    rows = deterministic_map(work, tasks, threads)
    _write_csv(
        out / "moments.csv",
        ("nu", "n", "p", "q", "x", "closed_oracle", "closed_printed", "brute", "rel_gap"),
        rows,
    )


def _cmd_korovkin(cfg: dict, out: Path, mode: str, resolution: int, threads: int) -> None:
    section = cfg.get("korovkin", {})
    rule = section.get("rule", "smooth")
    ns = sorted(section.get("n_values", [10, 50, 200, 400]))

    diags = deterministic_map(lambda n: korovkin_battery(rule, n, resolution), ns, threads)
    rows = [
        (
            d.n, d.p, d.q, d.supnorms[0], d.supnorms[1], d.supnorms[2],
            d.alpha_n, d.beta_n, d.gamma_n, d.nu1_analytic, d.nu1_analytic_printed,
        )
        for d in diags
    ]
    _write_csv(
        out / "korovkin.csv",
        (
            "n", "p", "q", "sup_nu0", "sup_nu1", "sup_nu2",
            "alpha_n", "beta_n", "gamma_n", "nu1_analytic", "nu1_analytic_printed",
        ),
        rows,
    )
    plot = []
    for nu in range(3):
        for d in diags:
            plot.append((f"sup_nu{nu}", d.n, d.supnorms[nu]))
    emit_plot_data(out / "korovkin_plot.csv", plot)


def _cmd_rates(cfg: dict, out: Path, mode: str, resolution: int, threads: int) -> None:
    section = cfg.get("rates", {})
    fname = section.get("f", "u")
    f = resolve(fname)
    ns = sorted(section.get("n_values", [5, 10, 50]))
    params = _params(section, "float", "0.95", "0.9")

    reports = deterministic_map(
        lambda n: rate_bound_check(f, n, params, resolution=resolution), ns, threads
    )
    rows = []
    for report in reports:
        for r in report.rows:
            rows.append((report.n, report.p, report.q, r.x, r.lhs, r.bound, r.margin, r.passed))
    _write_csv(
        out / "rates.csv",
        ("n", "p", "q", "x", "lhs", "bound", "margin", "passed"),
        rows,
    )
    profile = []
    grid = u_grid(resolution)
    for n in ns:
        printed = np.atleast_1d(delta_n(grid.xs, n, params, variant=VARIANT_PRINTED))
        oracle = np.atleast_1d(delta_n(grid.xs, n, params, variant=VARIANT_ORACLE))
        for x, dp, do in zip(grid.xs, printed, oracle):
            profile.append((f"delta_printed_n{n}", x, dp))
            profile.append((f"delta_oracle_n{n}", x, do))
    emit_plot_data(out / "delta_profile.csv", profile)


def _cmd_bivariate(cfg: dict, out: Path, mode: str, resolution: int, threads: int) -> None:
    section = cfg.get("bivariate", {})
    rule = section.get("rule", "smooth")
    ns = sorted(section.get("n_values", [5, 10, 50]))
    battery_res = int(section.get("battery_resolution", min(resolution, 128)))

    diags = deterministic_map(
        lambda n: biv.bivariate_korovkin_battery(rule, n, n, battery_res), ns, threads
    )
    rows = [
        (d.n1, d.n2, d.p1, d.q1, d.p2, d.q2) + d.supnorms
        for d in diags
    ]
    _write_csv(
        out / "bivariate_battery.csv",
        ("n1", "n2", "p1", "q1", "p2", "q2", "sup_g0", "sup_g1", "sup_g2", "sup_g3"),
        rows,
    )

    pair_mode = section.get("moment_mode", "rational")
    bp = biv.BivariateParams(
        params1=PQParams(
            _parse_number(section.get("p1", "9/10"), pair_mode),
            _parse_number(section.get("q1", "4/5"), pair_mode),
            mode=pair_mode,
        ),
        params2=PQParams(
            _parse_number(section.get("p2", "19/20"), pair_mode),
            _parse_number(section.get("q2", "7/10"), pair_mode),
            mode=pair_mode,
        ),
        n1=int(section.get("n1", 5)),
        n2=int(section.get("n2", 4)),
    )
    x = _parse_number(section.get("x", "2"), pair_mode)
    y = _parse_number(section.get("y", "1"), pair_mode)
    moment_rows = []
    for j in range(4):
        closed = biv.bivariate_moment(j, bp, x, y, variant=VARIANT_ORACLE)
        printed = biv.bivariate_moment(j, bp, x, y, variant=VARIANT_PRINTED)
        brute = biv.brute_force_moment_2d(j, bp, x, y)
        scale = max(abs(float(brute)), 1e-300)
        gap = abs(float(closed) - float(brute)) / scale
        moment_rows.append((j, bp.n1, bp.n2, x, y, closed, printed, brute, gap))
    _write_csv(
        out / "bivariate_moments.csv",
        ("j", "n1", "n2", "x", "y", "closed_oracle", "closed_printed", "brute", "rel_gap"),
        moment_rows,
    )
    plot = []
    for idx in range(4):
        for d in diags:
            plot.append((f"sup_g{idx}", d.n1, d.supnorms[idx]))
    emit_plot_data(out / "bivariate_plot.csv", plot)


_DENSITY_SETS = {
    "squares": lambda ks: (np.sqrt(ks.astype(float)).round().astype(np.int64) ** 2) == ks,
    "evens": lambda ks: ks % 2 == 0,
    "all": lambda ks: np.ones(ks.shape, dtype=bool),
}


def _cmd_density(cfg: dict, out: Path, mode: str, resolution: int, threads: int) -> None:
    section = cfg.get("density", {})
    set_name = section.get("set", "squares")
    if set_name not in _DENSITY_SETS:
        raise ConfigError(f"unknown density set {set_name!r}; have {sorted(_DENSITY_SETS)}")
    horizons = list(section.get("horizons", [1000, 10000, 1000000]))
    predicate = _DENSITY_SETS[set_name]

    reports = deterministic_map(lambda h: natural_density(predicate, h), horizons, threads)
    _write_csv(
        out / "density.csv",
        ("set", "horizon", "count", "density", "density_float"),
        [(set_name, r.horizon, r.count, r.density, float(r.density)) for r in reports],
    )

    rule = section.get("rule", "statonly")
    eps = float(section.get("eps", 0.1))
    threshold = float(section.get("threshold", 0.005))
    top = max(horizons)
    ps, qs = schedule_arrays(rule, top)
    check_p = st_limit_check(ps, 1.0, eps, horizons, threshold)
    check_q = st_limit_check(qs, 1.0, eps, horizons, threshold)
    rows = []
    for label, report in (("p_n", check_p), ("q_n", check_q)):
        for horizon, density in zip(report.horizons, report.densities):
            rows.append((rule, label, horizon, density, float(density), report.consistent))
    _write_csv(
        out / "st_check.csv",
        ("rule", "sequence", "horizon", "exception_density", "density_float", "consistent"),
        rows,
    )
    plot = [("density", r.horizon, float(r.density)) for r in reports]
    emit_plot_data(out / "density_plot.csv", plot)


def _cmd_identities(cfg: dict, out: Path, mode: str, resolution: int, threads: int) -> None:
    section = cfg.get("identities", {})
    n_max = int(section.get("n_max", 15))
    triples = section.get(
        "triples", [["9/10", "1/2", "1"], ["3/4", "2/3", "2"], ["1", "1/2", "1/3"]]
    )
    rows = []
    for raw in triples:
        if len(raw) != 3:
            raise ConfigError(f"a (p, q, x) triple needs 3 entries, got {raw}")
        p = _parse_number(raw[0], mode)
        q = _parse_number(raw[1], mode)
        x = _parse_number(raw[2], mode)
        params = PQParams(p, q, mode=mode)
        for n in range(1, n_max + 1):
            s = euler_sum(n, x, params)
            prod = euler_product(n, x, params)
            residual = s - prod
            rows.append(("euler", n, "", p, q, x, residual))
    params = _params(section, mode, "9/10", "1/2")
    for n in range(n_max + 1):
        brackets = pq_integers(n + 1, params)
        for k in range(n + 1):
            lhs = params.q**k * pq_integer(n - k + 1, params)
            rhs = brackets[n + 1] - params.p ** (n - k + 1) * brackets[k]
            rows.append(("shift", n, k, params.p, params.q, "", lhs - rhs))
    for k in range(n_max + 1):
        bk = pq_integer(k, params)
        bkm1 = pq_integer(k - 1, params) if k >= 1 else params.zero()
        residual = bk**2 - (params.q * bk * bkm1 + params.p ** max(k - 1, 0) * bk)
        rows.append(("square", k, "", params.p, params.q, "", residual))
    _write_csv(
        out / "identities.csv",
        ("identity", "n", "k", "p", "q", "x", "residual"),
        rows,
    )


_COMMAND_IMPL = {
    "moments": _cmd_moments,
    "korovkin": _cmd_korovkin,
    "rates": _cmd_rates,
    "bivariate": _cmd_bivariate,
    "density": _cmd_density,
    "identities": _cmd_identities,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pq-approx",
        description="Deterministic experiment harness for the operator library.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="TOML experiment configuration")
    parser.add_argument("--out", default="pq-approx-out", help="output directory")
    parser.add_argument("--mode", choices=MODES, help="arithmetic mode override")
    parser.add_argument("--resolution", type=int, help="u-grid resolution override")
    parser.add_argument("--threads", type=int, default=1, help="worker threads")
    return parser


def run(config: dict, command: str, out_dir: str, mode: str, resolution: int, threads: int) -> None:
    """Execute one command against a parsed configuration."""
    if resolution < 16:
        raise ConfigError(f"resolution must be >= 16, got {resolution}")
    if command not in _COMMAND_IMPL:
        raise ConfigError(f"unknown command {command!r}")
    if command not in config:
        # Individual fields all have defaults, but a config that never names
        # the command it is run with is a typo more often than an intent.
        raise ConfigError(f"config has no [{command}] section")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IOError(f"cannot create output directory {out}: {exc}") from exc
    _COMMAND_IMPL[command](config, out, mode, resolution, threads)
    catalogue = build_catalogue()
    _write_csv(out / "discrepancies.csv", CSV_HEADER, [e.row() for e in catalogue.entries])


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; those are configuration errors here.
        return 0 if exc.code == 0 else 1
    try:
        config = _load_config(args.config)
        settings = config.get("settings", {})
        mode = args.mode or settings.get("mode", "float")
        if mode not in MODES:
            raise ConfigError(f"unknown mode {mode!r}; have {MODES}")
        resolution = args.resolution or int(settings.get("resolution", 4096))
        threads = args.threads if args.threads else int(settings.get("threads", 1))
        run(config, args.command, args.out, mode, resolution, threads)
    except (ConfigError, DomainError, ValueError) as exc:
        print(f"pq-approx: configuration error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"pq-approx: I/O error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
