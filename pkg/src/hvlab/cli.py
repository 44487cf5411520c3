"""``hvlab`` command line: run experiments and write CSV/JSON result tables.

Exit codes: 0 success, 2 configuration error, 3 acceptance failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from hvlab import __version__, bell_algebra, bell_sim, boolean_model, streams
from hvlab.angles import parse_angle, parse_grid
from hvlab.errors import ConfigError, StatisticsError
from hvlab.hv_core import (
    BellState,
    Constant,
    Discipline,
    FixedIntegral,
    GeneratorConfig,
    Harmonic,
    UniformIntegral,
)
from hvlab.manifest import RunManifest, load_config_file

EXIT_OK, EXIT_CONFIG, EXIT_ACCEPT = 0, 2, 3

CANONICAL_ANGLES = "0,pi/4,pi/8,3*pi/8"

_MC = {"n": 1_000_000, "discipline": "accumulator", "modulus": "fixed:1", "waveform": "constant", "samples": 1}

DEFAULTS = {
    "bell": {**_MC, "state": "psi-minus", "semantics": "projection", "alpha": "0", "beta": "0", "delta_grid": None},
    "chsh": {**_MC, "state": "psi-minus", "angles": CANONICAL_ANGLES},
    "malus": {**_MC, "semantics": "projection", "alpha": "0", "beta": "0", "delta_grid": None},
    "boolean": {"n": 1_000_000, "state": "psi-minus", "alpha": "0", "beta": "0", "delta_grid": None},
    "gram": {"n": 1_000_000, "modulus": "fixed:1"},
    "hom": {"n": 10_000, "state": "all", "f": "1", "g": "0", "modulus": "fixed:1", "routing": True},
    "swap": {"draws": 1},
    "accept": {"n": 1_000_000, "only": None},
}

ACCEPT_SEED = 20200712


class UsageError(ConfigError):
    pass


# -- config resolution --------------------------------------------------------------

def _generator(cfg: dict) -> GeneratorConfig:
    mod = str(cfg.get("modulus", "fixed:1")).split(":")
    try:
        if mod[0] == "fixed" and len(mod) == 2:
            modulus = FixedIntegral(float(mod[1]))
        elif mod[0] == "uniform" and len(mod) == 3:
            modulus = UniformIntegral(float(mod[1]), float(mod[2]))
        else:
            raise ConfigError(f"modulus must be fixed:M or uniform:LO:HI, got {cfg['modulus']!r}")
        wave = str(cfg.get("waveform", "constant")).split(":")
        if wave[0] == "constant" and len(wave) == 1:
            waveform = Constant()
        elif wave[0] == "harmonic" and len(wave) == 2:
            waveform = Harmonic(int(wave[1]))
        else:
            raise ConfigError(f"waveform must be constant or harmonic:K, got {cfg['waveform']!r}")
        return GeneratorConfig(modulus_mode=modulus, waveform=waveform, samples_per_interval=int(cfg.get("samples", 1)))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _enum(kind, value, what):
    try:
        return kind(value)
    except ValueError:
        choices = ", ".join(k.value for k in kind)
        raise ConfigError(f"unknown {what} {value!r} (choose from {choices})") from None


def _positive_int(cfg, key):
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ConfigError(f"{key} must be a positive integer, got {v!r}")
    return v


def _resolve(args: argparse.Namespace) -> tuple[dict, int | None]:
    cmd = args.command
    cfg = dict(DEFAULTS[cmd])
    file_seed = None
    if args.config:
        loaded = load_config_file(args.config)
        sub = loaded.pop("_subcommand", cmd)
        if sub != cmd:
            raise ConfigError(f"config file is for '{sub}', not '{cmd}'")
        file_seed = loaded.pop("seed", None)
        loaded.pop("partitions", None)
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys for {cmd}: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key in DEFAULTS[cmd]:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v

    seed = args.seed if args.seed is not None else file_seed
    if seed is None and getattr(args, "allow_env_seed", False) and os.environ.get("HVLAB_SEED"):
        try:
            seed = int(os.environ["HVLAB_SEED"])
        except ValueError:
            raise ConfigError("HVLAB_SEED is not an integer") from None
    if seed is None and cmd == "accept":
        seed = ACCEPT_SEED
    needs_seed = not (cmd == "swap" and cfg["draws"] == 0)
    if seed is None and needs_seed:
        raise ConfigError("a seed is required: pass --seed (or --allow-env-seed with HVLAB_SEED set)")
    return cfg, seed


def _run_config(cfg: dict, seed: int) -> bell_sim.RunConfig:
    return bell_sim.RunConfig(
        seed=seed,
        state=_enum(BellState, cfg.get("state", "psi-minus"), "state"),
        semantics=_enum(bell_sim.Semantics, cfg.get("semantics", "projection"), "semantics"),
        alpha=parse_angle(cfg.get("alpha", 0)),
        beta=parse_angle(cfg.get("beta", 0)),
        n_intervals=_positive_int(cfg, "n"),
        generator=_generator(cfg) if "modulus" in cfg else GeneratorConfig(),
        discipline=_enum(Discipline, cfg.get("discipline", "accumulator"), "discipline"),
    )


def _unit_modulus(gen: GeneratorConfig) -> bool:
    return isinstance(gen.modulus_mode, FixedIntegral) and gen.modulus_mode.m == 1.0


def _settings(cfg: dict, rc: bell_sim.RunConfig) -> list[tuple[float, float, float]]:
    """(delta, alpha, beta) triples: the grid if given, else the single alpha/beta pair."""
    if cfg.get("delta_grid"):
        grid = parse_grid(cfg["delta_grid"])
        if not grid:
            raise ConfigError("delta grid is empty")
        return [(d, rc.alpha, rc.alpha - d) for d in grid]
    return [(rc.alpha - rc.beta, rc.alpha, rc.beta)]


def _opt(x):
    return "" if x is None else x


# -- subcommands ---------------------------------------------------------------

BELL_COLUMNS = ["state", "semantics", "alpha", "beta", "n_pp", "n_pm", "n_mp", "n_mm", "fraction", "analytic", "stderr"]


def vector_pp_law(rc: bell_sim.RunConfig, alpha: float, beta: float) -> float | None:
    """Expected ++ fraction, when a closed form exists for this configuration."""
    if not _unit_modulus(rc.generator):
        return None
    law = bell_sim.coincidence_law(rc.state, alpha, beta)
    if rc.semantics is bell_sim.Semantics.PROJECTION:
        return law / 2
    if rc.discipline is Discipline.BERNOULLI:
        # Uniform source angle: the correlation is halved.
        return 0.25 + (2 * law - 1) / 8
    return None


def cmd_bell(cfg, seed, partitions):
    rc = _run_config(cfg, seed)
    rows = []
    for _, a, b in _settings(cfg, rc):
        c = bell_sim.run_bell(replace(rc, alpha=a, beta=b), partitions)
        rows.append([rc.state.value, rc.semantics.value, a, b, c.n_pp, c.n_pm, c.n_mp, c.n_mm,
                     c.fraction("pp"), _opt(vector_pp_law(rc, a, b)), c.stderr("pp")])
    return BELL_COLUMNS, rows


CHSH_COLUMNS = ["model", "a", "a_prime", "b", "b_prime", "E_ab", "E_abp", "E_apb", "E_apbp",
                "se_ab", "se_abp", "se_apb", "se_apbp", "S", "S_stderr", "S_analytic"]


def _chsh_angles(cfg) -> tuple[float, float, float, float]:
    parts = [p for p in str(cfg["angles"]).split(",") if p.strip()]
    if len(parts) != 4:
        raise UsageError(f"--angles needs exactly four values a,a',b,b'; got {len(parts)}")
    return tuple(parse_angle(p) for p in parts)


def cmd_chsh(cfg, seed, partitions):
    angles = _chsh_angles(cfg)
    base = _run_config(cfg, seed)
    rows = []
    for model in ("vector-projection", "vector-naive-uniform", "boolean"):
        if model == "boolean":
            res = boolean_model.boolean_chsh(base, *angles, partitions=partitions)
            analytic = boolean_model.analytic_chsh(base.state, *angles)
        else:
            sem = bell_sim.Semantics.PROJECTION if model == "vector-projection" else bell_sim.Semantics.NAIVE_UNIFORM
            rc = replace(base, semantics=sem)
            res = bell_sim.chsh(rc, *angles, partitions=partitions)
            es = [vector_pp_law(replace(rc, alpha=x, beta=y), x, y) for x, y in bell_sim.chsh_settings(*angles)]
            if None in es:
                analytic = None
            else:
                # E = 4 * P(++) - 1 when the joint table is symmetric.
                analytic = bell_sim.chsh_from_correlations(*(4 * p - 1 for p in es))
        rows.append([model, *angles, *res.E, *res.E_stderr, res.S, res.S_stderr, _opt(analytic)])
    return CHSH_COLUMNS, rows


MALUS_COLUMNS = ["semantics", "alpha", "beta", "n_intervals", "n_subset", "n_both",
                 "subset_fraction", "fraction", "analytic", "stderr"]


def cmd_malus(cfg, seed, partitions):
    rc = _run_config(cfg, seed)
    exact = rc.semantics is bell_sim.Semantics.PROJECTION and _unit_modulus(rc.generator)
    rows = []
    for _, a, b in _settings(cfg, rc):
        mc = bell_sim.malus_counts(rc, a, b, partitions)
        rows.append([rc.semantics.value, a, b, mc.n_intervals, mc.n_subset, mc.n_both, mc.subset_fraction,
                     mc.fraction, _opt(math.cos(a - b) ** 2 if exact else None), mc.stderr])
    return MALUS_COLUMNS, rows


def cmd_boolean(cfg, seed, partitions):
    rc = _run_config(cfg, seed)
    rows = []
    for _, a, b in _settings(cfg, rc):
        c = boolean_model.run_boolean_bell(replace(rc, alpha=a, beta=b), partitions)
        rows.append([rc.state.value, "boolean", a, b, c.n_pp, c.n_pm, c.n_mp, c.n_mm, c.fraction("pp"),
                     boolean_model.analytic_joint(rc.state, a, b)["pp"], c.stderr("pp")])
    return BELL_COLUMNS, rows


def cmd_gram(cfg, seed, partitions):
    n = _positive_int(cfg, "n")
    draws = bell_algebra.draw_pairs(streams.block_rng(seed, 0, tag=4), n, _generator(cfg).modulus_mode)
    res = bell_algebra.gram_average(draws)
    names = [s.value for s in bell_algebra.STATE_ORDER]
    rows = [[f"gram[{names[i]},{names[j]}]", float(res.matrix[i, j]), 1.0 if i == j else 0.0]
            for i in range(4) for j in range(4)]
    rows += [["<f*g>", res.mean_fg, 0.0], ["<f^2>", res.mean_f2, 0.5], ["<g^2>", res.mean_g2, 0.5]]
    return ["quantity", "measured", "analytic"], rows


HOM_COLUMNS = ["state", "f", "g", "m", "mC", "mD", "mC_analytic", "mD_analytic",
               "mC_routed", "mD_routed", "cd_fraction", "cd_expected"]


def cmd_hom(cfg, seed, partitions):
    states = list(bell_algebra.STATE_ORDER) if cfg["state"] == "all" else [_enum(BellState, cfg["state"], "state")]
    f, g = parse_angle(cfg["f"]), parse_angle(cfg["g"])
    routing = bool(cfg["routing"])
    gen = replace(_generator(cfg), samples_per_interval=1)
    rows = []
    for s in states:
        m_c, m_d = bell_algebra.hom_outputs(s, f, g)
        c_an, d_an = bell_algebra.hom_closed_form(s, f, g)
        if routing and s in bell_algebra.ROUTED_STATES:
            r_c, r_d = bell_algebra.apply_routing_rule(m_c, m_d)
        else:
            r_c, r_d = m_c, m_d
        frac = bell_algebra.hom_classifier(s, streams.block_rng(seed, 0, tag=5), _positive_int(cfg, "n"),
                                           gen, routing=routing)
        expected = 1.0 if s is BellState.PSI_MINUS else 0.0
        rows.append([s.value, f, g, f * f + g * g, m_c, m_d, c_an, d_an, r_c, r_d, frac,
                     _opt(expected if routing or s in (BellState.PSI_MINUS, BellState.PHI_PLUS) else None)])
    return HOM_COLUMNS, rows


SWAP_COLUMNS = ["regime", "draw", "index", "basis", "lhs", "rhs", "diff"]


def cmd_swap(cfg, seed, partitions):
    draws = cfg["draws"]
    if isinstance(draws, bool) or not isinstance(draws, int) or draws < 0:
        raise ConfigError(f"draws must be a non-negative integer, got {draws!r}")
    rows = [[r["regime"], 0, r["index"], r["basis"], r["lhs"], r["rhs"], r["diff"]]
            for r in bell_algebra.qm_swap_check().rows()]
    if draws:
        reports = bell_algebra.swap_reports(streams.block_rng(seed, 0, tag=6), draws)
        per = len(bell_algebra.SWAP_REGIMES)
        for k, rep in enumerate(reports):
            rows += [[r["regime"], k // per + 1, r["index"], r["basis"], r["lhs"], r["rhs"], r["diff"]]
                     for r in rep.rows()]
    return SWAP_COLUMNS, rows


def cmd_accept(cfg, seed, partitions):
    from hvlab import acceptance

    only = None
    if cfg.get("only"):
        only = {int(x) for x in str(cfg["only"]).split(",")}
    results = acceptance.run_all(seed=seed, n=_positive_int(cfg, "n"), partitions=partitions, only=only,
                                 echo=lambda line: print(line, file=sys.stderr))
    rows = [[r.criterion, r.name, "PASS" if r.passed else "FAIL", r.detail] for r in results]
    return ["criterion", "check", "status", "detail"], rows


COMMANDS = {
    "bell": cmd_bell, "chsh": cmd_chsh, "malus": cmd_malus, "boolean": cmd_boolean,
    "gram": cmd_gram, "hom": cmd_hom, "swap": cmd_swap, "accept": cmd_accept,
}


# -- output --------------------------------------------------------------------

def render(columns, rows, manifest: RunManifest, as_json: bool) -> str:
    digest = manifest.content_hash()
    if as_json:
        doc = {"manifest_sha256": digest, "subcommand": manifest.subcommand, "columns": columns,
               "rows": [dict(zip(columns, (None if v == "" else v for v in row))) for row in rows]}
        return json.dumps(doc, indent=2, default=float) + "\n"
    buf = io.StringIO()
    buf.write(f"# manifest-sha256={digest} subcommand={manifest.subcommand} version={manifest.version}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


# -- argument parsing ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hvlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"hvlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="64-bit seed (required; no time-based seeding)")
    common.add_argument("--allow-env-seed", action="store_true", help="use $HVLAB_SEED when --seed is absent")
    common.add_argument("--partitions", type=int, default=None, help="parallel partitions (default: CPU count)")
    common.add_argument("--config", help="TOML config or manifest; explicit flags override it")
    common.add_argument("--out", help="output file (default: stdout); a .manifest.toml is written beside it")
    common.add_argument("--json", action="store_true", help="write JSON instead of CSV")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--n", type=int, help="intervals per run (default 1000000)")
    mc.add_argument("--discipline", help="accumulator (default) or bernoulli")
    mc.add_argument("--modulus", help="fixed:M (default fixed:1) or uniform:LO:HI with LO+HI=2")
    mc.add_argument("--waveform", help="constant (default) or harmonic:K")
    mc.add_argument("--samples", type=int, help="samples per interval (default 1)")

    angles = argparse.ArgumentParser(add_help=False)
    angles.add_argument("--alpha", help="station A angle, e.g. pi/8")
    angles.add_argument("--beta", help="station B angle")
    angles.add_argument("--delta-grid", dest="delta_grid", help="start:stop:step or list; beta = alpha - delta")

    s = sub.add_parser("bell", parents=[common, mc, angles], help="vector-model coincidence runs")
    s.add_argument("--state")
    s.add_argument("--semantics", help="projection (default) or naive-uniform")

    s = sub.add_parser("chsh", parents=[common, mc], help="CHSH S for vector and Boolean models")
    s.add_argument("--state")
    s.add_argument("--angles", help="a,a',b,b' (default 0,pi/4,pi/8,3*pi/8)")

    s = sub.add_parser("malus", parents=[common, mc, angles], help="two analyzers on one beam")
    s.add_argument("--semantics")

    s = sub.add_parser("boolean", parents=[common, angles], help="Boolean-model coincidence runs")
    s.add_argument("--n", type=int)
    s.add_argument("--state")

    s = sub.add_parser("gram", parents=[common], help="averaged Bell-vector Gram matrix")
    s.add_argument("--n", type=int, help="ensemble size (default 1000000)")
    s.add_argument("--modulus")

    s = sub.add_parser("hom", parents=[common], help="beam-splitter outputs and C&D classifier")
    s.add_argument("--state", help="one Bell state or 'all' (default)")
    s.add_argument("--f", help="x amplitude of the test sample (default 1)")
    s.add_argument("--g", help="y amplitude of the test sample (default 0)")
    s.add_argument("--n", type=int, help="classifier intervals (default 10000)")
    s.add_argument("--modulus")
    s.add_argument("--no-routing", dest="routing", action="store_const", const=False, default=None)

    s = sub.add_parser("swap", parents=[common], help="swapping-identity discrepancy report")
    s.add_argument("--draws", type=int, help="random draws per regime (default 1)")

    s = sub.add_parser("accept", parents=[common], help="run the acceptance suite")
    s.add_argument("--n", type=int, help="intervals per point (default 1000000)")
    s.add_argument("--only", help="comma-separated criterion numbers")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    partitions = args.partitions if args.partitions is not None else streams.default_partitions()
    try:
        if partitions < 1:
            raise ConfigError("--partitions must be >= 1")
        cfg, seed = _resolve(args)
        t0 = time.perf_counter()
        columns, rows = COMMANDS[args.command](cfg, seed, partitions)
        manifest = RunManifest(subcommand=args.command, config={k: v for k, v in cfg.items() if v is not None},
                               seed=seed, partitions=partitions, duration_s=round(time.perf_counter() - t0, 6))
        text = render(columns, rows, manifest, args.json)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hvlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, StatisticsError) as exc:
        print(f"hvlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.out:
        out = Path(args.out)
        _atomic_write(out, text)
        _atomic_write(out.with_name(out.name + ".manifest.toml"), manifest.to_toml())
    else:
        sys.stdout.write(text)
    if args.command == "accept" and any(r[2] == "FAIL" for r in rows):
        return EXIT_ACCEPT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
