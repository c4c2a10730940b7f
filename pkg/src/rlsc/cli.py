"""Experiment orchestration CLI.

Subcommands: analytic-nrlsc, analytic-srlsc, simulate, sweep, oracle,
verify.  Each job is described by a declarative TOML (or JSON) config;
every result is written as CSV plus a JSON summary.  All randomness flows
from the config seed, so a given config always produces byte-identical
output files.

Exit codes: 0 ok, 2 config error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import builtin_codes
from .channels import ChannelSpec, EmissionModel, build_emission
from .debt import INFINITE, CodeParams, Mode
from .errors import ConfigError, ContractError, NumericalError

_FLOAT_FMT = "{:.17g}"


# -- config ------------------------------------------------------------------


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    data = path.read_bytes()
    if path.suffix == ".json":
        return json.loads(data)
    if path.suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(data.decode("utf-8"))
    raise ConfigError(f"unsupported config extension {path.suffix!r} (use .toml or .json)")


def _require(cfg: dict, section: str, key: str, types, check=None, what=""):
    if key not in cfg:
        raise ConfigError(f"missing field [{section}] {key}")
    value = cfg[key]
    if not isinstance(value, types):
        raise ConfigError(f"field [{section}] {key} has wrong type "
                          f"{type(value).__name__}{': ' + what if what else ''}")
    if check is not None and not check(value):
        raise ConfigError(f"field [{section}] {key} = {value!r} invalid"
                          f"{': ' + what if what else ''}")
    return value


def parse_channel(cfg: dict) -> ChannelSpec:
    if "channel" not in cfg:
        raise ConfigError("missing [channel] section")
    ch = cfg["channel"]
    packet_mode = bool(ch.get("packet_mode", False))
    if "transition" in ch:
        t1 = np.asarray(ch["transition"], dtype=np.float64)
    elif "p" in ch and "r" in ch:
        p = _require(ch, "channel", "p", (int, float), lambda v: 0 <= v <= 1,
                     "probability in [0,1]")
        r = _require(ch, "channel", "r", (int, float), lambda v: 0 <= v <= 1,
                     "probability in [0,1]")
        t1 = np.array([[1 - p, p], [r, 1 - r]], dtype=np.float64)
    else:
        raise ConfigError("channel needs either 'transition' or both 'p' and 'r'")
    if "emissions" not in ch or not isinstance(ch["emissions"], list):
        raise ConfigError("channel needs an 'emissions' list (one entry per state)")
    emissions = []
    for i, em in enumerate(ch["emissions"]):
        kind = em.get("kind")
        if kind not in ("binomial", "packet", "table"):
            raise ConfigError(f"channel.emissions[{i}].kind must be "
                              f"binomial|packet|table, got {kind!r}")
        kwargs = {k: v for k, v in em.items() if k != "kind"}
        for prob_key in ("p_success", "p_delivery"):
            if prob_key in kwargs and not 0 <= kwargs[prob_key] <= 1:
                raise ConfigError(f"channel.emissions[{i}].{prob_key} must be in [0,1]")
        try:
            emissions.append(build_emission(kind, **kwargs))
        except (TypeError, ContractError) as exc:
            raise ConfigError(f"channel.emissions[{i}]: {exc}") from exc
    try:
        return ChannelSpec(t1, tuple(emissions), packet_mode)
    except ContractError as exc:
        raise ConfigError(f"channel: {exc}") from exc


def parse_code(cfg: dict, mode_override: str = None) -> CodeParams:
    if "code" not in cfg:
        raise ConfigError("missing [code] section")
    c = cfg["code"]
    k = _require(c, "code", "k", int, lambda v: v >= 1, "integer >= 1")
    n = _require(c, "code", "n", int, lambda v: v > k, "integer > k")
    alpha_raw = c.get("alpha")
    if alpha_raw == "inf":
        alpha = INFINITE
    elif isinstance(alpha_raw, int) and alpha_raw >= 1:
        alpha = alpha_raw
    else:
        raise ConfigError(f"field [code] alpha must be a positive integer or "
                          f"\"inf\", got {alpha_raw!r}")
    delta = _require(c, "code", "delta", int, lambda v: v >= 0, "integer >= 0")
    mode_str = mode_override or c.get("mode", "nonsystematic")
    try:
        mode = Mode(mode_str)
    except ValueError:
        raise ConfigError(f"field [code] mode must be nonsystematic|systematic_pec, "
                          f"got {mode_str!r}") from None
    try:
        return CodeParams(k, n, alpha, delta, mode)
    except ContractError as exc:
        raise ConfigError(f"code: {exc}") from exc


_BASELINE_NAMES = tuple(c.name for c in builtin_codes())


def parse_engines(cfg: dict, channel: ChannelSpec, base: CodeParams):
    """Map user-facing engine names to (label, sim engine, CodeParams)."""
    sim_cfg = cfg.get("sim", {})
    sweep_cfg = cfg.get("sweep", {})
    names = sweep_cfg.get("engines") or sim_cfg.get("engines") or ["debt"]
    specs = []
    for name in names:
        engine, _, suffix = name.partition("-")
        if name.startswith("baseline:"):
            if name.split(":", 1)[1] not in _BASELINE_NAMES:
                raise ConfigError(f"unknown baseline code in engine {name!r}; "
                                  f"available: {list(_BASELINE_NAMES)}")
            specs.append((name, name, base))
        elif engine in ("debt", "codec", "analytic") and suffix in ("", "nrlsc", "srlsc"):
            if suffix == "nrlsc":
                params = CodeParams(base.k, base.n, base.alpha, base.delta,
                                    Mode.NONSYSTEMATIC)
            elif suffix == "srlsc":
                params = CodeParams(base.k, base.n, base.alpha, base.delta,
                                    Mode.SYSTEMATIC_PEC)
            else:
                params = base
            specs.append((name, engine, params))
        else:
            raise ConfigError(f"unknown engine {name!r}")
    return specs


# -- output ------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return _FLOAT_FMT.format(value)
    return str(value)


def emit_csv(rows, path, columns=None) -> None:
    """UTF-8 CSV with a header row, 17-significant-digit floats, and a column
    order fixed by `columns` (or the first row's key order)."""
    if columns is None:
        if not rows:
            raise ContractError("emit_csv needs explicit columns for empty row sets")
        columns = list(rows[0].keys())
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(c, "")) for c in columns))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path) -> list:
    """Inverse of emit_csv (strings preserved; numbers parsed when possible)."""
    text = Path(path).read_text(encoding="utf-8").rstrip("\n")
    lines = text.split("\n")
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        row = {}
        for key, cell in zip(header, line.split(",")):
            try:
                row[key] = int(cell)
            except ValueError:
                try:
                    row[key] = float(cell)
                except ValueError:
                    row[key] = cell
        rows.append(row)
    return rows


def _write_summary(path, job: str, cfg_path, rows, extra=None) -> None:
    summary = {"job": job, "config": str(cfg_path), "version": __version__,
               "rows": rows}
    if extra:
        summary.update(extra)
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True,
                                     default=_fmt) + "\n", encoding="utf-8")


def _out_paths(cfg, args, default_stem: str):
    out = args.out or cfg.get("output", {}).get("path", f"{default_stem}.csv")
    out = Path(out)
    return out, out.with_suffix(".json")


# -- jobs --------------------------------------------------------------------


def job_analytic_nrlsc(cfg: dict, args) -> int:
    from .analytic_nrlsc import analytic_terms, pe_nrlsc
    from .chain import build_chain, stationary_initial
    channel = parse_channel(cfg)
    params = parse_code(cfg, mode_override="nonsystematic")
    if params.alpha_infinite:
        raise ConfigError("analytic-nrlsc needs finite alpha")
    chain = build_chain(params, channel)
    pi0 = stationary_initial(chain)
    terms = analytic_terms(chain, pi0, params.delta, params.alpha)
    pe = pe_nrlsc(chain, pi0, params.delta, params.alpha)
    row = {"k": params.k, "n": params.n, "alpha": params.alpha,
           "delta": params.delta, "pe": pe, "e_interval": terms.e_interval,
           "e_lg": terms.e_lg, "e_lb1": terms.e_lb1, "e_lb2": terms.e_lb2}
    csv_path, json_path = _out_paths(cfg, args, "analytic_nrlsc")
    emit_csv([row], csv_path)
    _write_summary(json_path, "analytic-nrlsc", args.config, [row],
                   {"pi0": list(pi0)})
    print(f"pe = {pe:.12e}  (E_interval={terms.e_interval:.6f}, "
          f"E_LG={terms.e_lg:.3e}, E_LB1={terms.e_lb1:.3e}, E_LB2={terms.e_lb2:.3e})")
    print(f"wrote {csv_path} and {json_path}")
    return 0


def job_analytic_srlsc(cfg: dict, args) -> int:
    from .analytic_srlsc import pe_srlsc_infinite
    if "srlsc" not in cfg:
        raise ConfigError("missing [srlsc] section (p, delta, optional l_max)")
    s = cfg["srlsc"]
    p = _require(s, "srlsc", "p", (int, float), lambda v: 0 < v < 1 or v == 1,
                 "probability in (0, 1]")
    if p <= 0.5:
        raise ConfigError(f"srlsc.p = {p} is not > 1/2: the zero-debt state must "
                          f"be positive recurrent")
    deltas = s.get("delta_values", [s.get("delta")])
    if deltas == [None]:
        raise ConfigError("missing field [srlsc] delta (or delta_values)")
    l_max = s.get("l_max")
    rows = []
    for delta in deltas:
        if not isinstance(delta, int) or delta < 0:
            raise ConfigError(f"srlsc delta must be an integer >= 0, got {delta!r}")
        res = pe_srlsc_infinite(float(p), delta, l_max)
        rows.append({"p": float(p), "delta": delta, "l_max_used": res.l_max_used,
                     "tail_bound": res.tail_bound, "numerator": res.numerator,
                     "denominator": res.denominator, "pe": res.pe})
        print(f"p={p} delta={delta}: pe = {res.pe:.12e} "
              f"(l_max={res.l_max_used}, tail<={res.tail_bound:.2e})")
    csv_path, json_path = _out_paths(cfg, args, "analytic_srlsc")
    emit_csv(rows, csv_path)
    _write_summary(json_path, "analytic-srlsc", args.config, rows)
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _sim_options(cfg: dict, args):
    sim_cfg = cfg.get("sim")
    if not sim_cfg:
        raise ConfigError("missing [sim] section")
    T = _require(sim_cfg, "sim", "T", int, lambda v: v >= 1, "integer >= 1")
    rounds = _require(sim_cfg, "sim", "rounds", int, lambda v: v >= 1, "integer >= 1")
    seed = args.seed if args.seed is not None else sim_cfg.get("seed")
    if not isinstance(seed, int):
        raise ConfigError("missing integer field [sim] seed (or pass --seed)")
    q = sim_cfg.get("q", 16)
    if not isinstance(q, int) or not 1 <= q <= 32:
        raise ConfigError(f"field [sim] q must be an integer in [1,32], got {q!r}")
    return T, rounds, seed, q


def job_simulate(cfg: dict, args) -> int:
    from .sim import analytic_pe, estimate_pe
    channel = parse_channel(cfg)
    base = parse_code(cfg)
    T, rounds, seed, q = _sim_options(cfg, args)
    specs = parse_engines(cfg, channel, base)
    rows = []
    for label, engine, params in specs:
        if engine == "analytic":
            pe = analytic_pe(channel, params)
            rows.append({"engine": label, "pe": pe, "ci_lo": pe, "ci_hi": pe,
                         "cycles": 0, "e_interval_hat": math.nan,
                         "e_errors_per_cycle_hat": math.nan,
                         "T": T, "rounds": 0, "seed": seed})
            print(f"{label}: pe = {pe:.10e} (closed form)")
            continue
        est = estimate_pe(channel, params, T, rounds, seed, engine=engine, q=q,
                          threads=args.threads)
        rows.append({"engine": label, "pe": est.pe_hat, "ci_lo": est.ci95[0],
                     "ci_hi": est.ci95[1], "cycles": est.cycles,
                     "e_interval_hat": est.e_interval_hat,
                     "e_errors_per_cycle_hat": est.e_errors_per_cycle_hat,
                     "T": T, "rounds": rounds, "seed": seed})
        print(f"{label}: pe = {est.pe_hat:.10e} "
              f"ci95 = [{est.ci95[0]:.3e}, {est.ci95[1]:.3e}] cycles = {est.cycles}")
    csv_path, json_path = _out_paths(cfg, args, "simulate")
    emit_csv(rows, csv_path)
    _write_summary(json_path, "simulate", args.config, rows)
    print(f"wrote {csv_path} and {json_path}")
    return 0


def job_sweep(cfg: dict, args) -> int:
    from .sim import sweep
    channel = parse_channel(cfg)
    base = parse_code(cfg)
    T, rounds, seed, q = _sim_options(cfg, args)
    sweep_cfg = cfg.get("sweep")
    if not sweep_cfg:
        raise ConfigError("missing [sweep] section")
    axis = _require(sweep_cfg, "sweep", "axis", str)
    values = _require(sweep_cfg, "sweep", "values", list,
                      lambda v: True, "list of axis values")
    specs = parse_engines(cfg, channel, base)
    rows = sweep(channel, specs, T, rounds, seed, axis, values, q=q,
                 threads=args.threads)
    compare = bool(sweep_cfg.get("compare_to_analytic", False))
    if compare:
        rows = _attach_theory(rows, channel, specs, T, axis)
    csv_path, json_path = _out_paths(cfg, args, "sweep")
    columns = list(rows[0].keys()) if rows else \
        ["axis", "value", "engine", "pe", "ci_lo", "ci_hi", "cycles",
         "e_interval_hat", "T", "rounds"]
    emit_csv(rows, csv_path, columns)
    _write_summary(json_path, "sweep", args.config, rows)
    for row in rows:
        head = ", ".join(f"{k}={_fmt(v)}" for k, v in row.items()
                         if k in (axis, "axis", "value", "engine", "pe",
                                  "pe_sim", "pe_theory", "rel_dev"))
        print(head)
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _attach_theory(rows, channel, specs, T, axis):
    """Reshape sweep rows into deviation-study rows with pe_theory / rel_dev."""
    from .sim import _apply_axis, analytic_pe
    out = []
    for row in rows:
        label = row["engine"]
        params = next(p for (lab, _, p) in specs if lab == label)
        ch, pr, _ = _apply_axis(channel, params, T, axis, row["value"])
        theory = analytic_pe(ch, pr)
        out.append({axis: row["value"], "engine": label, "pe_theory": theory,
                    "pe_sim": row["pe"],
                    "rel_dev": abs(theory - row["pe"]) / row["pe"]
                    if row["pe"] else math.inf,
                    "ci_lo": row["ci_lo"], "ci_hi": row["ci_hi"],
                    "cycles": row["cycles"], "rounds": row["rounds"]})
    return out


def job_oracle(cfg: dict, args) -> int:
    """Exact-method cross-checks on a small instance: interval pmf vs trace
    enumeration, closed-form pe vs exhaustive cycle expansion."""
    from .analytic_nrlsc import pe_nrlsc, pe_oracle_small
    from .chain import (build_chain, interval_pmf, stationary_initial,
                        trace_enumeration_oracle)
    channel = parse_channel(cfg)
    params = parse_code(cfg, mode_override="nonsystematic")
    oracle_cfg = cfg.get("oracle", {})
    k_max = oracle_cfg.get("k_max", 10)
    if params.zeta > 8 or channel.n_states > 3:
        raise ConfigError("oracle jobs need a small instance "
                          "(zeta <= 8, at most 3 states)")
    chain = build_chain(params, channel)
    pi0 = stationary_initial(chain)
    rows = []
    worst = 0.0
    for k in range(1, k_max + 1):
        closed = interval_pmf(chain, pi0, k)
        enum = trace_enumeration_oracle(chain, pi0, k)
        gap = abs(closed - enum)
        worst = max(worst, gap)
        rows.append({"check": f"interval_pmf_k{k}", "closed_form": closed,
                     "oracle": enum, "abs_gap": gap})
    pe = pe_nrlsc(chain, pi0, params.delta, params.alpha)
    pe_oracle = pe_oracle_small(chain, pi0, params.delta, params.alpha)
    rows.append({"check": "pe", "closed_form": pe, "oracle": pe_oracle,
                 "abs_gap": abs(pe - pe_oracle)})
    csv_path, json_path = _out_paths(cfg, args, "oracle")
    emit_csv(rows, csv_path)
    _write_summary(json_path, "oracle", args.config, rows)
    for row in rows:
        print(f"{row['check']}: closed={_fmt(row['closed_form'])} "
              f"oracle={_fmt(row['oracle'])} gap={row['abs_gap']:.2e}")
    print(f"wrote {csv_path} and {json_path}")
    if worst > 1e-12 or abs(pe - pe_oracle) > 1e-4:
        raise NumericalError(f"oracle disagreement: pmf gap {worst:.2e}, "
                             f"pe gap {abs(pe - pe_oracle):.2e}")
    return 0


def job_verify(cfg: dict, args) -> int:
    from .verify import run_all
    failures = run_all(verbose=True)
    if failures:
        raise NumericalError(f"{failures} invariant check(s) failed")
    return 0


_JOBS = {
    "analytic-nrlsc": job_analytic_nrlsc,
    "analytic-srlsc": job_analytic_srlsc,
    "simulate": job_simulate,
    "sweep": job_sweep,
    "oracle": job_oracle,
    "verify": job_verify,
}


def run_config(path, command: str, args) -> int:
    cfg = load_config(path) if path else {}
    kind = cfg.get("job", {}).get("kind", command)
    if kind != command:
        raise ConfigError(f"config declares job kind {kind!r} but the "
                          f"{command!r} subcommand was invoked")
    return _JOBS[command](cfg, args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rlsc",
        description="Streaming-code error probabilities: closed forms, "
                    "Monte-Carlo simulation, and exact-method oracles.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _JOBS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       required=name not in ("verify",),
                       help="TOML or JSON experiment description")
        p.add_argument("--out", default=None, help="output CSV path "
                       "(JSON summary goes next to it)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--threads", type=int, default=1,
                       help="parallel workers for simulation rounds")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run_config(args.config, args.command, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ContractError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
