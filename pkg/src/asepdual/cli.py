"""Command-line front end.

Subcommands::

    asepdual verify     --suite algebra|duality|theorems|appendix|all  | --check NAME ...
    asepdual evolve     --L --N --x --z --kind --driving --M --q --t
    asepdual decompose  (same as evolve) -> SAM weights
    asepdual transition --L --K --driving --M --q --t
    asepdual profile    --L --shocks --z --q --kind
    asepdual report     [--from verify.json] -> CSV summary

Values are resolved as: built-in defaults < ``--config`` JSON < explicit
flags.  Every output embeds the resolved configuration.  Exit codes:
0 success, 1 check failure, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import gzip
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import verify as V
from .evolution import DrivingSpec, PropagationError, decompose_onto_sams, expm_action, transition_table
from .measures import SAMSpec, profile_to_csv, sam_fugacities, sam_vector
from .scalar import NumericField
from .statespace import Configuration, basis

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

PROPAGATOR_COMMANDS = ("evolve", "decompose", "transition")

CHECKS = (
    "algebra", "theorem1", "prop1", "theorem2", "theorem3",
    "theorem2-chain", "theorem3-chain", "appendix", "pseudocommutator", "lemmas",
)

# documented defaults; ``None`` means "required by the command that uses it"
DEFAULTS = {
    "L": 6,
    "N": None,
    "K": None,
    "n": 1,
    "x": None,
    "eta": None,
    "shocks": None,
    "q": "3/2",
    "z": "1",
    "t": 0.5,
    "alpha": "0",
    "beta": "0",
    "sign": "+",
    "kind": "II",
    "driving": "global",
    "M": None,
    "mode": None,
    "tol": None,
    "method": "auto",
    "suite": None,
    "check": None,
    "source": None,
    "out": None,
    "seed": 0,
    "gzip": False,
    "no_timing": False,
}


class UsageError(Exception):
    pass


# -- parsing helpers ----------------------------------------------------------------

def parse_q(text) -> Fraction:
    """``q`` as an exact rational: ``3/2``, ``1.5`` or ``2``."""
    try:
        q = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse q={text!r}") from exc
    if q <= 0:
        raise UsageError("q must be positive")
    return q


def parse_sites(text, L: int) -> tuple[int, ...]:
    """Comma-separated site list (``""`` is the empty set)."""
    if text is None:
        return ()
    if isinstance(text, (list, tuple)):
        items = [int(v) for v in text]
    else:
        s = str(text).strip()
        try:
            items = [int(v) for v in s.split(",") if v.strip()] if s else []
        except ValueError as exc:
            raise UsageError(f"cannot parse site list {text!r}") from exc
    if len(set(items)) != len(items):
        raise UsageError(f"repeated site in {text!r}")
    for v in items:
        if not 1 <= v <= L:
            raise UsageError(f"site {v} outside 1..{L}")
    return tuple(sorted(items))


def _frac(text, what: str) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse {what}={text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--config", help="JSON file with option values (flags override it)")
    g.add_argument("--mode", choices=("exact", "numeric"), help="arithmetic mode")
    g.add_argument("--tol", type=float, help="numeric tolerance")
    g.add_argument("--out", help="output path (default: stdout)")
    g.add_argument("--seed", type=int, help="seed for sampled instances")
    g.add_argument("--gzip", action="store_true", default=None, help="gzip JSON vector output")
    g.add_argument("--no-timing", dest="no_timing", action="store_true", default=None,
                   help="omit runtimes so reruns are byte-identical")

    model = argparse.ArgumentParser(add_help=False)
    m = model.add_argument_group("model")
    m.add_argument("--L", type=int, help="ring size")
    m.add_argument("--N", type=int, help="particle number of the evolved measure")
    m.add_argument("--K", type=int, help="number of shocks / dual particles")
    m.add_argument("--q", help="asymmetry q as rational or decimal (e.g. 3/2)")
    m.add_argument("--z", help="fugacity")
    m.add_argument("--t", type=float, help="time")
    m.add_argument("--x", help="shock sites, comma-separated")
    m.add_argument("--kind", choices=("I", "II"), help="SAM kind")
    m.add_argument("--driving", choices=("global", "boundary"), help="conditioning type")
    m.add_argument("--M", type=int, help="conditioning particle number")
    m.add_argument("--method", choices=("auto", "dense", "krylov", "uniformization"))

    p = argparse.ArgumentParser(prog="asepdual", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common, model], help="run verification checks")
    sel = v.add_mutually_exclusive_group()
    sel.add_argument("--suite", choices=sorted(V.SUITES) + ["all"])
    sel.add_argument("--check", choices=CHECKS)
    v.add_argument("--n", type=int, help="power of S (prop1)")
    v.add_argument("--sign", choices=("+", "-"))
    v.add_argument("--alpha", help="q-exponent of alpha")
    v.add_argument("--beta", help="q-exponent of beta (pseudocommutator)")
    v.add_argument("--eta", help="configuration as 0/1 string (theorem1)")

    for name, text in (("evolve", "propagate a SAM or basis state"),
                       ("decompose", "evolve a SAM and decompose it over the SAM family")):
        e = sub.add_parser(name, parents=[common, model], help=text)
        e.add_argument("--eta", help="start from this 0/1 configuration instead of a SAM")
    sub.add_parser("transition", parents=[common, model], help="conditioned transition table (CSV)")
    pr = sub.add_parser("profile", parents=[common, model], help="SAM density profile (CSV)")
    pr.add_argument("--shocks", help="shock sites, comma-separated")
    r = sub.add_parser("report", parents=[common, model], help="CSV summary of verification reports")
    r.add_argument("--from", dest="source", help="verify JSON output to summarise (default: run the suite)")
    r.add_argument("--suite", choices=sorted(V.SUITES) + ["all"])
    return p


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags into one validated dict."""
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)}")
        cfg.update(loaded)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg["command"] = args.command
    cmd = args.command
    if cfg["mode"] is None:
        cfg["mode"] = "exact" if cmd == "verify" and cfg["check"] not in ("theorem1", "theorem2", "theorem3") else "numeric"
    if cfg["mode"] not in ("exact", "numeric"):
        raise UsageError(f"mode must be exact or numeric, got {cfg['mode']!r}")
    if cmd in PROPAGATOR_COMMANDS and cfg["mode"] == "exact":
        raise UsageError(f"'{cmd}' propagates numerically; exact mode is not available")
    if cmd == "verify" and cfg["check"] in ("theorem1", "theorem2", "theorem3") and cfg["mode"] == "exact":
        raise UsageError(f"check {cfg['check']} uses propagators; exact mode is not available")
    L = cfg["L"]
    if not isinstance(L, int) or L < 1:
        raise UsageError(f"L must be a positive integer, got {L!r}")
    cfg["q"] = str(parse_q(cfg["q"]))
    if cfg["tol"] is None:
        cfg["tol"] = 1e-9 if cfg["check"] in ("theorem2", "theorem3") else 1e-12
    if cfg["tol"] <= 0:
        raise UsageError("tol must be positive")
    if cfg["t"] is not None and cfg["t"] < 0:
        raise UsageError("t must be nonnegative")
    if cfg["sign"] not in ("+", "-"):
        raise UsageError("sign must be + or -")
    if cfg["kind"] not in ("I", "II"):
        raise UsageError("kind must be I or II")
    if cfg["driving"] not in ("global", "boundary"):
        raise UsageError("driving must be global or boundary")
    for key in ("N", "K", "M"):
        v = cfg[key]
        if v is not None and not (isinstance(v, int) and 0 <= v <= L):
            raise UsageError(f"{key} must be an integer in 0..{L}")
    # normalise site lists to canonical strings so the echo is stable
    for key in ("x", "shocks"):
        if cfg[key] is not None:
            cfg[key] = ",".join(map(str, parse_sites(cfg[key], L)))
    if cfg["eta"] is not None:
        eta = str(cfg["eta"])
        if len(eta) != L or set(eta) - {"0", "1"}:
            raise UsageError(f"eta must be a 0/1 string of length {L}")
        cfg["eta"] = eta
    return cfg


def _q(cfg) -> float:
    return float(Fraction(cfg["q"]))


def _z(cfg) -> float:
    z = float(_frac(cfg["z"], "z"))
    if z < 0:
        raise UsageError("z must be nonnegative")
    return z


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError(f"{cfg['command']} needs --{' --'.join(missing)}")


# -- output ---------------------------------------------------------------------------

def _echo(cfg) -> dict:
    return {k: cfg[k] for k in sorted(cfg)}


def _csv_header(cfg) -> str:
    return "# config: " + json.dumps(_echo(cfg), sort_keys=True) + "\n"


def _emit(cfg, text: str, path: str | None = None, gz: bool = False):
    path = path if path is not None else cfg["out"]
    if path is None:
        sys.stdout.write(text)
        return
    data = text.encode()
    if gz:
        if not path.endswith(".gz"):
            path += ".gz"
        # fixed mtime keeps compressed output byte-identical across runs
        data = gzip.compress(data, mtime=0)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(data)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


# -- commands ------------------------------------------------------------------------

def _verify_reports(cfg) -> list[V.VerificationReport]:
    mode, q, tol, L = cfg["mode"], _q(cfg), cfg["tol"], cfg["L"]
    if cfg["suite"] is not None:
        conf = {"L": L, "q": q, "mode": mode, "tol": tol, "seed": cfg["seed"]}
        return V.run_suite(cfg["suite"], conf)
    chk = cfg["check"]
    if chk is None:
        raise UsageError("verify needs --suite or --check")
    alpha = _frac(cfg["alpha"], "alpha")
    if chk == "algebra":
        return V.check_algebra(L, mode, q, tol=tol)
    if chk == "theorem1":
        _require(cfg, "eta", "x")
        return [V.check_duality_theorem1(L, parse_sites(cfg["x"], L), cfg["eta"], cfg["t"], q, tol,
                                         method=cfg["method"] if cfg["method"] != "auto" else "dense")]
    if chk == "prop1":
        _require(cfg, "K")
        return [V.check_proposition1(L, cfg["K"], cfg["n"], cfg["sign"], alpha, mode, q, tol)]
    if chk in ("theorem2", "theorem3"):
        _require(cfg, "N", "K", "x")
        x = parse_sites(cfg["x"], L)
        fn = V.check_theorem2 if chk == "theorem2" else V.check_theorem3
        method = cfg["method"] if cfg["method"] != "auto" else "dense"
        return [fn(L, cfg["N"], cfg["K"], x, _z(cfg), q, cfg["t"], tol, min(tol, 1e-10), method)]
    if chk in ("theorem2-chain", "theorem3-chain"):
        _require(cfg, "N", "K")
        fn = V.check_theorem2_chain if chk == "theorem2-chain" else V.check_theorem3_chain
        return fn(L, cfg["N"], cfg["K"], mode, q, tol)
    if chk == "appendix":
        return [V.check_appendix_boundary_relations(L, q, alpha, _frac(cfg["beta"], "beta"), mode=mode, tol=tol)]
    if chk == "pseudocommutator":
        _require(cfg, "N")
        return [V.check_pseudocommutator(L, cfg["N"], cfg["sign"], alpha, _frac(cfg["beta"], "beta"), mode, q, tol=tol)]
    if chk == "lemmas":
        return [V.check_lemmas(L, mode, q, tol=tol, max_sets=None if L <= 6 else 64, seed=cfg["seed"])]
    raise UsageError(f"unknown check {chk!r}")


def _reports_json(cfg, reports) -> dict:
    timing = not cfg["no_timing"]
    passed = sum(r.passed for r in reports)
    return {
        "config": _echo(cfg),
        "summary": {"total": len(reports), "passed": passed, "failed": len(reports) - passed},
        "reports": [r.to_dict(timing) for r in reports],
    }


def cmd_verify(cfg) -> int:
    reports = _verify_reports(cfg)
    _emit(cfg, _dumps(_reports_json(cfg, reports)))
    for r in reports:
        if not r.passed:
            print(r.summary(), file=sys.stderr)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _initial_vector(cfg):
    """Sector ``N`` restriction of the SAM with shocks ``x``, or the basis vector of ``eta``."""
    L, q = cfg["L"], _q(cfg)
    F = NumericField(q)
    if cfg["eta"] is not None:
        eta = Configuration.from_string(cfg["eta"])
        N = eta.n_particles
        b = basis(L, N)
        arr = np.zeros(b.size)
        arr[b.index(eta.mask)] = 1.0
        return N, arr
    _require(cfg, "N", "x")
    x = parse_sites(cfg["x"], L)
    if len(x) > cfg["N"]:
        raise UsageError(f"{len(x)} shocks do not fit in an N={cfg['N']} sector")
    return cfg["N"], sam_vector(SAMSpec(L, x, _z(cfg), cfg["kind"]), F, sector=cfg["N"]).to_array()


def _driving(cfg, default_M) -> DrivingSpec:
    M = cfg["M"] if cfg["M"] is not None else default_M
    if M is None:
        raise UsageError("driving needs --M")
    return DrivingSpec(cfg["driving"], M)


def _evolved(cfg):
    N, v0 = _initial_vector(cfg)
    K = len(parse_sites(cfg["x"], cfg["L"])) if cfg["x"] is not None else None
    drive = _driving(cfg, K)
    H = drive.generator(cfg["L"], _q(cfg), N)
    vt = expm_action(H, v0, cfg["t"], tol=cfg["tol"], method=cfg["method"])
    return N, vt


def cmd_evolve(cfg) -> int:
    N, vt = _evolved(cfg)
    L = cfg["L"]
    states = basis(L, N).states
    out = {
        "config": _echo(cfg),
        "L": L,
        "N": N,
        "dim": int(vt.size),
        "triplets": [[i, 0, float(val)] for i, val in enumerate(vt) if val != 0.0],
        "basis": [Configuration.from_mask(int(s), L).to_string() for s in states],
        "total": float(vt.sum()),
    }
    _emit(cfg, _dumps(out), gz=bool(cfg["gzip"]))
    return EXIT_OK


def cmd_decompose(cfg) -> int:
    _require(cfg, "x")
    if cfg["eta"] is not None:
        raise UsageError("decompose starts from a SAM; drop --eta")
    L = cfg["L"]
    x = parse_sites(cfg["x"], L)
    K = cfg["K"] if cfg["K"] is not None else len(x)
    N, vt = _evolved(cfg)
    dec = decompose_onto_sams(vt, L, N, K, _z(cfg), cfg["kind"], _q(cfg))
    out = {
        "config": _echo(cfg),
        "weights": {",".join(map(str, y)): float(c) for y, c in zip(dec.shock_sets, dec.weights)},
        "residual": dec.residual,
        "condition": dec.condition,
        "rank": dec.rank,
        "rank_deficient": dec.rank_deficient,
        "weight_sum": float(dec.weights.sum()),
        "min_weight": float(dec.weights.min()) if dec.weights.size else 0.0,
    }
    buf = io.StringIO()
    buf.write(_csv_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["y", "weight"])
    for y, c in zip(dec.shock_sets, dec.weights):
        w.writerow([" ".join(map(str, y)), repr(float(c))])
    if cfg["out"] is None:
        sys.stdout.write(_dumps(out))
    else:
        base = Path(cfg["out"])
        _emit(cfg, _dumps(out), str(base.with_suffix(".json")))
        _emit(cfg, buf.getvalue(), str(base.with_suffix(".csv")))
    return EXIT_OK


def cmd_transition(cfg) -> int:
    _require(cfg, "K")
    tab = transition_table(cfg["L"], cfg["K"], _driving(cfg, None), _q(cfg), cfg["t"], tol=cfg["tol"],
                           method=cfg["method"] if cfg["method"] != "auto" else "dense")
    _emit(cfg, tab.to_csv("config: " + json.dumps(_echo(cfg), sort_keys=True)))
    return EXIT_OK


def cmd_profile(cfg) -> int:
    _require(cfg, "shocks")
    L = cfg["L"]
    spec = SAMSpec(L, parse_sites(cfg["shocks"], L), _z(cfg), cfg["kind"])
    prof = sam_fugacities(spec, _q(cfg))
    header = "config: " + json.dumps(_echo(cfg), sort_keys=True)
    _emit(cfg, profile_to_csv(prof, header))
    return EXIT_OK


def cmd_report(cfg) -> int:
    if cfg["source"] is not None:
        try:
            data = json.loads(Path(cfg["source"]).read_text())
            rows = data["reports"]
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot read reports from {cfg['source']}: {exc}") from exc
    else:
        cfg["suite"] = cfg["suite"] or "all"
        rows = _reports_json(cfg, _verify_reports(cfg))["reports"]
    buf = io.StringIO()
    buf.write(_csv_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "mode", "pass", "residual", "runtime_ms", "params"])
    for r in rows:
        w.writerow([r["check"], r["mode"], int(bool(r["pass"])), repr(float(r["residual"])),
                    "" if r.get("runtime_ms") is None else r["runtime_ms"],
                    json.dumps(r["params"], sort_keys=True)])
    n_pass = sum(bool(r["pass"]) for r in rows)
    buf.write(f"# passed {n_pass}/{len(rows)}\n")
    _emit(cfg, buf.getvalue())
    return EXIT_OK if n_pass == len(rows) else EXIT_FAIL


COMMANDS = {
    "verify": cmd_verify,
    "evolve": cmd_evolve,
    "decompose": cmd_decompose,
    "transition": cmd_transition,
    "profile": cmd_profile,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PropagationError, np.linalg.LinAlgError, FloatingPointError, OverflowError, ZeroDivisionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:  # includes ParameterError
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
