"""Batch front door: identity audits, classification, witnesses, scaling.

All four subcommands read one declarative JSON config (no prompts), compute,
and write machine-readable reports: CSV for tabular sweeps, JSON for
verdicts and witnesses, plus a run_meta.json carrying the timestamp and the
echoed config.  Reports are byte-identical across reruns with the same
config and seed; only the metadata file varies.

Exit codes: 0 clean, 1 at least one finding (a scaling MISMATCH in an
audit, a CONFLICT verdict, a failed witness construction or an off-analytic
slope), 2 unusable configuration.  The worker count for the Monte Carlo
oracles comes from the CONETUBE_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .boundedness import classify, schur_witness, t_interval
from .errors import (ConetubeError, ConfigError, InvalidInputError,
                     WitnessConstructionError)
from .geometry import TubePoint
from .identities import (IDENTITY_IDS, get_identity, random_params,
                         random_point)
from .operators import (ParameterSet, make_test_function, scaling_experiment)
from .oracle import INCONCLUSIVE, MISMATCH, verify_identity
from .reporting import (AUDIT_COLUMNS, SCALING_COLUMNS, audit_detail,
                        audit_row, write_csv, write_json, write_metadata)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError("config", f"file not found: {path}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be an object")
    return cfg


def _get(cfg: dict, field: str, default, kind, positive: bool = False):
    value = cfg.get(field, default)
    if value is None:
        return None
    try:
        value = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(field, f"expected {kind.__name__}, got {value!r}") from None
    if positive and value <= 0:
        raise ConfigError(field, f"must be positive, got {value}")
    return value


def _vector(cfg: dict, field: str, n: int):
    value = cfg.get(field)
    if value is None:
        raise ConfigError(field, "missing")
    arr = np.asarray(value, dtype=float)
    if arr.shape != (n,):
        raise ConfigError(field, f"expected {n} numbers, got {value!r}")
    return arr


def _parameter_set(obj: dict, where: str) -> ParameterSet:
    if not isinstance(obj, dict):
        raise ConfigError(where, "parameter set must be an object")
    n = _get(obj, "n", None, int, positive=True)
    if n is None:
        raise ConfigError(f"{where}.n", "missing")
    p = _get(obj, "p", None, float)
    q = _get(obj, "q", None, float)
    if p is None or q is None:
        raise ConfigError(f"{where}.p/q", "missing")
    if not (1.0 < p <= q):
        raise ConfigError(f"{where}.p/q", f"need 1 < p <= q, got p={p}, q={q}")
    vecs = {name: tuple(_vector(obj, name, n))
            for name in ("alpha", "beta", "a", "b", "c")}
    return ParameterSet(n=n, p=p, q=q, **vecs)


def _parse_point(identity_id: str, n: int, obj):
    ident = get_identity(identity_id)
    if ident.domain in ("cone", "slice") and identity_id not in ("L23_2", "COR1_2"):
        key = {"L24": "b", "L25": "v"}.get(identity_id, "t")
        arr = np.asarray(obj.get(key, obj.get("point")), dtype=float)
        if arr.shape != (2 * n - 1,):
            raise ConfigError("cases.point", f"expected a {2 * n - 1}-vector")
        return arr
    def tube(o):
        return TubePoint.make(np.asarray(o["x"], dtype=float),
                              np.asarray(o["y"], dtype=float))
    if identity_id == "L26":
        return (tube(obj["z"]), tube(obj["xi"]))
    return tube(obj.get("z", obj))


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------

def _audit_cases(cfg: dict, n: int, seed: int):
    explicit = cfg.get("cases")
    if explicit is not None:
        if not isinstance(explicit, list):
            raise ConfigError("cases", "must be a list")
        for i, case in enumerate(explicit):
            ident = case.get("identity")
            if ident not in IDENTITY_IDS:
                raise ConfigError(f"cases[{i}].identity",
                                  f"unknown identity {ident!r}")
            cn = int(case.get("n", n))
            params = {k: np.asarray(v, dtype=float)
                      for k, v in case.get("params", {}).items()}
            want = set(get_identity(ident).param_names)
            if set(params) != want:
                raise ConfigError(f"cases[{i}].params",
                                  f"{ident} needs exactly {sorted(want)}")
            point = _parse_point(ident, cn, case.get("point", {}))
            yield ident, cn, params, point
        return
    identities = cfg.get("identities", list(IDENTITY_IDS))
    if not isinstance(identities, list) or \
            any(i not in IDENTITY_IDS for i in identities):
        raise ConfigError("identities", f"must be a subset of {IDENTITY_IDS}")
    per = _get(cfg, "configs_per_identity", 3, int, positive=True)
    rng = np.random.default_rng(seed)
    for ident in identities:
        for _ in range(per):
            params = random_params(ident, n, rng)
            point = random_point(ident, n, rng)
            yield ident, n, params, point


def cmd_audit(cfg: dict, out_dir: Path) -> int:
    n = _get(cfg, "n", 1, int, positive=True)
    if n not in (1, 2, 3):
        raise ConfigError("n", f"supported orders are 1, 2, 3; got {n}")
    seed = _get(cfg, "seed", 0, int)
    budget = _get(cfg, "budget", 200_000, int, positive=True)
    oracle = cfg.get("oracle", "auto")
    if oracle not in ("auto", "mc", "quad"):
        raise ConfigError("oracle", f"must be auto/mc/quad, got {oracle!r}")
    dual = bool(cfg.get("include_dual_region", True))

    rows, details = [], []
    inconclusive = 0
    findings = 0
    for i, (ident, cn, params, point) in enumerate(_audit_cases(cfg, n, seed)):
        rec = verify_identity(ident, params, point, budget=budget,
                              seed=seed + 977 * i, method=oracle, n=cn)
        rows.append(audit_row(rec))
        details.append(audit_detail(rec))
        if rec.status == MISMATCH:
            findings += 1
        if rec.status == INCONCLUSIVE:
            inconclusive += 1
        if dual and ident in ("L23_2", "COR1_2") and cn <= 2:
            rec2 = verify_identity(ident, params, point, budget=budget,
                                   seed=seed + 977 * i + 13, method=oracle,
                                   n=cn, region="dual")
            details.append(audit_detail(rec2))

    write_csv(out_dir / "audit.csv", AUDIT_COLUMNS, rows)
    statuses = [r[-1] for r in rows]
    summary = {"rows": len(rows),
               "by_status": {s: statuses.count(s) for s in sorted(set(statuses))}}
    write_json(out_dir / "audit_details.json",
               {"summary": summary, "records": details})
    write_metadata(out_dir / "run_meta.json", cfg, {"command": "audit"})
    if inconclusive:
        print(f"warning: {inconclusive} inconclusive row(s); raise the budget "
              "to sharpen them", file=sys.stderr)
    print(f"audit: {len(rows)} rows -> {out_dir / 'audit.csv'}")
    for status, count in summary["by_status"].items():
        print(f"  {status}: {count}")
    return 1 if findings else 0


# ---------------------------------------------------------------------------
# classify / witness
# ---------------------------------------------------------------------------

def _parameter_sets(cfg: dict):
    sets = cfg.get("parameter_sets")
    if not isinstance(sets, list) or not sets:
        raise ConfigError("parameter_sets", "must be a non-empty list")
    return [_parameter_set(obj, f"parameter_sets[{i}]")
            for i, obj in enumerate(sets)]


def _breakdown_payload(breakdown):
    return [{"id": c.id, "satisfied": c.satisfied, "margin": c.margin,
             "kind": c.kind} for c in breakdown.conditions]


def cmd_classify(cfg: dict, out_dir: Path) -> int:
    verdicts = []
    conflicts = 0
    for params in _parameter_sets(cfg):
        result = classify(params)
        if result.verdict == "CONFLICT":
            conflicts += 1
        verdicts.append({
            "params": params.__dict__,
            "verdict": result.verdict,
            "necessary": _breakdown_payload(result.theorem1),
            "sufficient": _breakdown_payload(result.theorem2),
        })
    write_json(out_dir / "verdicts.json", {"verdicts": verdicts})
    write_metadata(out_dir / "run_meta.json", cfg, {"command": "classify"})
    print(f"classify: {len(verdicts)} set(s) -> {out_dir / 'verdicts.json'}")
    for v in verdicts:
        print(f"  {v['verdict']}")
    return 1 if conflicts else 0


def cmd_witness(cfg: dict, out_dir: Path) -> int:
    witnesses = []
    failures = 0
    for params in _parameter_sets(cfg):
        entry = {"params": params.__dict__,
                 "t_interval": t_interval(params)}
        try:
            w = schur_witness(params)
            entry.update({"ok": True, "t": w.t, "r": w.r, "l": w.l,
                          "c_prime": w.c_prime,
                          "endpoints": list(w.endpoints),
                          "identity_residuals": list(w.identity_residuals),
                          "inequality_margins": list(w.inequality_margins)})
        except WitnessConstructionError as exc:
            failures += 1
            entry.update({"ok": False, "error": str(exc),
                          "endpoints": exc.endpoints})
        except InvalidInputError as exc:
            failures += 1
            entry.update({"ok": False, "error": str(exc)})
        witnesses.append(entry)
    write_json(out_dir / "witnesses.json", {"witnesses": witnesses})
    write_metadata(out_dir / "run_meta.json", cfg, {"command": "witness"})
    print(f"witness: {len(witnesses)} set(s), {failures} failure(s) "
          f"-> {out_dir / 'witnesses.json'}")
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------

def cmd_scaling(cfg: dict, out_dir: Path) -> int:
    params = _parameter_set(cfg.get("params", {}), "params")
    n = params.n
    l = _vector(cfg, "l", n)
    r = _vector(cfg, "r", n)
    base = np.asarray(cfg.get("R_base", [1.0] * n), dtype=float)
    if base.shape != (n,) or np.any(base <= 0):
        raise ConfigError("R_base", "must be a positive n-vector")
    grid = cfg.get("R_grid", [1.0, 2.0, 4.0, 8.0])
    if not isinstance(grid, list) or len(grid) < 2:
        raise ConfigError("R_grid", "need at least two grid points")
    budget = _get(cfg, "budget", 200_000, int, positive=True)
    seed = _get(cfg, "seed", 0, int)
    coords = cfg.get("coordinates")
    tf = make_test_function(n, l, r, base)
    report = scaling_experiment(params, tf, grid, budget, seed,
                                coordinates=coords)

    rows = []
    for c in report.coordinates:
        for k, R in enumerate(c.R_values):
            rows.append((c.coordinate + 1, R, c.f_norms[k], c.f_sigmas[k],
                         c.Tf_norms[k], c.Tf_sigmas[k]))
    write_csv(out_dir / "scaling.csv", SCALING_COLUMNS, rows)
    slopes = [{
        "coordinate": c.coordinate + 1,
        "f_slope": c.f_slope, "f_slope_se": c.f_slope_se,
        "f_analytic": c.f_analytic,
        "Tf_slope": c.Tf_slope, "Tf_slope_se": c.Tf_slope_se,
        "Tf_analytic": c.Tf_analytic,
        "slope_difference": c.slope_difference,
        "difference_analytic": c.Tf_analytic - c.f_analytic,
    } for c in report.coordinates]
    write_json(out_dir / "scaling.json", {"slopes": slopes})
    write_metadata(out_dir / "run_meta.json", cfg, {"command": "scaling"})
    print(f"scaling: {len(rows)} rows -> {out_dir / 'scaling.csv'}")
    bad = 0
    for s in slopes:
        off_f = abs(s["f_slope"] - s["f_analytic"])
        tol = max(3.0 * s["f_slope_se"], 0.05)
        flag = "" if off_f <= tol else "  <-- off analytic"
        bad += off_f > tol
        print(f"  R[{s['coordinate']}]: f slope {s['f_slope']:+.4f} "
              f"(analytic {s['f_analytic']:+.4f}), Tf-f difference "
              f"{s['slope_difference']:+.4f}{flag}")
    return 1 if bad else 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conetube",
        description="audit cone-tube integral identities, classify operator "
                    "parameters, construct Schur witnesses, fit norm slopes")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("audit", cmd_audit), ("classify", cmd_classify),
                     ("witness", cmd_witness), ("scaling", cmd_scaling)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="JSON config file")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--budget", type=int, default=None)
        sp.add_argument("--n", type=int, default=None, choices=(1, 2, 3))
        sp.add_argument("--out", default="reports")
        sp.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        for field in ("seed", "budget", "n"):
            value = getattr(args, field)
            if value is not None:
                cfg[field] = value
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        return args.fn(cfg, out_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConetubeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
