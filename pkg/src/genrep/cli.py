"""Command-line driver: every construction as a subcommand with JSON in and out.

Exit codes: 0 a verdict was computed, 2 invalid input, 3 an internal
postcondition check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Optional

from . import __version__
from .errors import InputError, VerificationError
from .exact import Angle, format_fraction, parse_fraction
from . import schemas

class Config:
    def __init__(self, seed=None, cap=None, guard_size=2000, out="json"):
        self.seed = seed
        self.cap = cap
        self.guard_size = guard_size
        self.out = out

    def to_json(self) -> dict:
        return {"seed": self.seed, "cap": self.cap, "guard_size": self.guard_size, "out": self.out}

    def require_seed(self, what: str) -> int:
        if self.seed is None:
            raise InputError(f"{what} needs an explicit --seed")
        return self.seed


def _frac(x, path):
    return parse_fraction(x, path=path)


# --- command handlers (dict in, dict out) ------------------------------------------------

def run_abgroup(inp: dict, cfg: Config) -> dict:
    from .abgroup import (AbGroup, covering_radius_torus, discon_obstruction, extend_character,
                          h_gamma, has_star, hit_target_bounded)

    schemas.check("abgroup", inp)
    G = AbGroup.from_json(inp["group"])
    out = {"group": G.to_json(), "gen_ids": list(G.gen_ids), "bounded": G.bounded}
    if G.bounded:
        obs = discon_obstruction(G)
        out.update({
            "exponent": G.exponent,
            "has_star": has_star(G),
            "h_gamma_order": h_gamma(G).order,
            "discon_obstruction": None if obs is None else {"p": obs[0], "n": obs[1]},
        })
    if "extend_character" in inp:
        task = inp["extend_character"]
        theta = [Angle(_frac(t, f"$.extend_character.theta[{i}]")) for i, t in enumerate(task["theta"])]
        if len(theta) != len(task["delta_gens"]):
            raise InputError("$.extend_character: theta needs one value per generator", path="$.extend_character")
        chi = extend_character(G, task["delta_gens"], theta)
        out["extended_character"] = chi.to_json()
    if "hit_target" in inp:
        task = inp["hit_target"]
        psis = [[Angle(_frac(v, "$.hit_target.psis")) for v in row] for row in task["psis"]]
        x = [Angle(_frac(v, "$.hit_target.x")) for v in task["x"]]
        phis, gamma = hit_target_bounded(G, task["delta_gens"], psis, x)
        out["hit_target"] = {"characters": [phi.to_json() for phi in phis], "gamma": list(gamma),
                             "values": [format_fraction(phi(gamma).value) for phi in phis]}
    if "torus_generators" in inp:
        gens = [[Angle(_frac(v, "$.torus_generators")) for v in g] for g in inp["torus_generators"]]
        kw = {} if cfg.cap is None else {"cap": cfg.cap}
        out["torus_covering_radius"] = format_fraction(covering_radius_torus(gens, **kw))
    return out


def run_induce(inp: dict, cfg: Config) -> dict:
    from .metspace import BiInvMetricGroup, FinMetric, IsoAction, induce, scale_for_induction

    schemas.check("induce", inp)
    K = BiInvMetricGroup.from_json(inp["K"], path="$.K")
    Z = FinMetric.from_json(inp["Z"], path="$.Z")
    try:
        perms = {int(g): p for g, p in inp["alpha"].items()}
    except ValueError:
        raise InputError("$.alpha: keys must be element indices", path="$.alpha") from None
    alpha = IsoAction(K.group, perms, Z)
    out = {}
    if inp.get("rescale"):
        sc = scale_for_induction(K, inp["gamma"], Z)
        K = sc.group
        out["rescale_factor"] = format_fraction(sc.factor)
    res = induce(K, inp["gamma"], Z, alpha)
    out.update({
        "Y": res.Y.to_json(),
        "beta": res.beta.to_json(),
        "embedding": res.embedding,
        "orbit_reps": [list(r) for r in res.orbit_reps],
        "metadata": res.metadata,
    })
    return out


def run_katetov(inp: dict, cfg: Config) -> dict:
    from .katetov import catalogue_audit, extend_partial_isometry, grid_values, saturate
    from .metspace import FinMetric

    schemas.check("katetov", inp)
    X = FinMetric.from_json(inp["space"], path="$.space")
    mode = inp["mode"]
    if mode in ("saturate", "audit"):
        for key in ("s", "D", "R"):
            if key not in inp:
                raise InputError(f"$.{key}: required for mode {mode}", path=f"$.{key}")
        s, D, R = inp["s"], inp["D"], _frac(inp["R"], "$.R")
        if mode == "audit":
            missing = catalogue_audit(X, s, grid_values(D, R))
            return {"complete": not missing, "missing_count": len(missing),
                    "first_missing": _jsonable(missing[0]) if missing else None}
        strategy = inp.get("strategy", "auto")
        if strategy == "random":
            cfg.require_seed("the random strategy")
        tower = saturate(X, s, D, R, guard=cfg.guard_size, strategy=strategy, seed=cfg.seed or 0)
        missing = catalogue_audit(tower.space, s, grid_values(D, R), limit=1)
        if missing:
            raise VerificationError("saturate.audit", "output misses a catalogue entry")
        return {"tower": tower.to_json(), "size": len(tower.space), "audit_complete": True}
    if "map" not in inp:
        raise InputError("$.map: required for mode extend_isometry", path="$.map")
    index = {str(lab): i for i, lab in enumerate(X.labels)}
    try:
        p = {index[a]: int(b) for a, b in inp["map"].items()}
    except KeyError as exc:
        raise InputError(f"$.map: unknown point {exc.args[0]}", path="$.map") from None
    cap = _frac(inp["cap"], "$.cap") if "cap" in inp else None
    ext = extend_partial_isometry(X, p, cap=cap)
    return {"space": ext.space.to_json(), "sigma": list(ext.sigma), "method": ext.method, "copies": ext.copies}


def _value_group(obj, path):
    from .lzero import circle_group
    from .metspace import BiInvMetricGroup

    if "circle" in obj:
        return circle_group(obj["circle"]), True
    return BiInvMetricGroup.from_json(obj, path=path), False


def _step_map(T, values, circle, path):
    from .lzero import StepMap

    if circle:
        return T.from_angles([Angle(_frac(v, path)) for v in values])
    return StepMap(T.level, values)


def run_lzero(inp: dict, cfg: Config) -> dict:
    from .abgroup import AbGroup
    from .lzero import StepGroup, density_report, refine, surjective_hom

    schemas.check("lzero", inp)
    mode, level = inp["mode"], inp["level"]
    if mode == "surjective_hom":
        if "group" not in inp:
            raise InputError("$.group: required for surjective_hom", path="$.group")
        hom = surjective_hom(AbGroup.from_json(inp["group"], path="$.group"), level)
        return {
            "level": level,
            "value_group": {"circle": hom.N},
            "image_order": hom.image_order(),
            "generators": [hom.target.to_json(f)["values"] for f in hom.gen_images],
            "gen_ids": list(hom.group.gen_ids),
        }
    if "K" not in inp:
        raise InputError("$.K: required for this mode", path="$.K")
    K, circle = _value_group(inp["K"], "$.K")
    T = StepGroup(level, K)
    if mode == "density":
        gens = [_step_map(T, g, circle, f"$.generators[{i}]") for i, g in enumerate(inp.get("generators", []))]
        kw = {} if cfg.cap is None else {"cap": cfg.cap}
        return density_report(T, gens, **kw).to_json(T)
    f = _step_map(T, inp.get("map", []), circle, "$.map")
    m = inp.get("to_level", level)
    T2 = StepGroup(m, K)
    return {"refined": T2.to_json(refine(f, m))}


def run_oscheck(inp: dict, cfg: Config) -> dict:
    from .metspace import BiInvMetricGroup
    from .oscheck import OscInstance, check_witness, sampled_falsifier, search_witness

    if not isinstance(inp, dict) or "group" not in inp or "epsilon" not in inp or "A" not in inp:
        raise InputError("oscheck needs group, epsilon and A")
    schemas.check("metric_group", inp["group"])
    G = BiInvMetricGroup.from_json(inp["group"], path="$.group")
    eps = _frac(inp["epsilon"], "$.epsilon")
    A = _indices(inp["A"], len(G), "$.A")
    mode = inp.get("mode", "check")
    cap = cfg.cap if cfg.cap is not None else 20
    if mode == "search":
        rep = search_witness(G, A, eps, int(inp.get("max_b", 12)), cap=cap)
        return {"mode": mode, **rep.to_json()}
    B = _indices(inp.get("B", "all"), len(G), "$.B")
    inst = OscInstance(G, A, eps, B)
    if mode == "sample":
        v = sampled_falsifier(inst, int(inp.get("trials", 1000)), cfg.require_seed("sampled oscheck"))
    elif mode == "check":
        v = check_witness(inst, cap=cap)
    else:
        raise InputError(f"unknown oscheck mode {mode!r}")
    return {"mode": mode, "A": list(inst.A), "B": list(inst.B), "epsilon": format_fraction(eps), **v.to_json(inst)}


def _indices(value, n, path):
    if value == "all":
        return list(range(n))
    if not isinstance(value, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in value):
        raise InputError(f"{path}: expected a list of element indices or \"all\"", path=path)
    return value


def _smallest_primes(M: int, d: int) -> list:
    from .freeprod import _is_prime

    out, q = [], max(M, 2)
    while len(out) < d:
        if _is_prime(q):
            out.append(q)
        q += 1
    return out


def run_freeprod(inp: dict, cfg: Config) -> dict:
    from .freeprod import VectorFactor, build_quotient, max_exponent, perm_order, word_from_json, word_str

    schemas.check("freeprod", inp)
    d, n = inp["d"], inp["n"]
    Z = VectorFactor((0,) * d)
    words = [word_from_json(w, Z) for w in inp["words"]]
    N, M = max_exponent(words)
    p = inp.get("p") or _smallest_primes(M, d)
    res = build_quotient(d, n, words, p, relaxed=inp.get("relaxed", False))
    out = res.to_json()
    out["N"] = N
    out["word_images"] = {word_str(w): list(res.q(w)) for w in res.words}
    out["word_image_orders"] = {word_str(w): perm_order(res.q(w)) for w in res.words}
    return out


def run_unitary(inp: dict, cfg: Config) -> dict:
    from .unitary import DiagRep, c1_search, is_cyclic, positive_definite_fn, spectral_measure, vector_from_json

    schemas.check("unitary", inp)
    rep = DiagRep.from_json(inp["rep"], path="$.rep")
    xi = vector_from_json(rep, inp["xi"], path="$.xi")
    kw = {} if cfg.cap is None else {"max_group": cfg.cap}
    out = {
        "conductor": rep.conductor,
        "cyclic": is_cyclic(rep, xi, **kw).to_json(),
        "spectral_measure": spectral_measure(rep, xi).to_json(),
    }
    gammas = inp.get("gammas", [list(rep.group.zero)])
    out["positive_definite"] = [
        {"gamma": list(g), "value": positive_definite_fn(rep, xi, g).to_json()} for g in gammas
    ]
    if "f" in inp:
        if "eps" not in inp:
            raise InputError("$.eps: required with f", path="$.eps")
        f = [Angle(_frac(v, f"$.f[{i}]")) for i, v in enumerate(inp["f"])]
        out["c1"] = c1_search(rep, f, _frac(inp["eps"], "$.eps")).to_json()
    return out


def run_validate(inp, cfg: Config, kind: Optional[str] = None) -> dict:
    from .abgroup import AbGroup
    from .metspace import BiInvMetricGroup, FinMetric

    kind = kind or schemas.detect(inp)
    schemas.check(kind, inp)
    if kind == "metric":
        FinMetric.from_json(inp, path="$")
    elif kind == "metric_group":
        BiInvMetricGroup.from_json(inp, path="$")
    elif kind == "group":
        AbGroup.from_json(inp, path="$")
    return {"valid": True, "kind": kind}


HANDLERS = {
    "abgroup": run_abgroup,
    "induce": run_induce,
    "katetov": run_katetov,
    "lzero": run_lzero,
    "oscheck": run_oscheck,
    "freeprod": run_freeprod,
    "unitary": run_unitary,
}


# --- pipeline ---------------------------------------------------------------------

def _lookup(obj, path: str):
    for part in path.split(".") if path else []:
        if isinstance(obj, list):
            obj = obj[int(part)]
        else:
            obj = obj[part]
    return obj


def _resolve(obj, prev):
    """Replace {"$prev": "dotted.path"} by that part of the previous stage result."""
    if isinstance(obj, dict):
        if set(obj) == {"$prev"}:
            if prev is None:
                raise InputError("stage 0 cannot refer to a previous stage")
            try:
                return _lookup(prev, obj["$prev"])
            except (KeyError, IndexError, ValueError, TypeError):
                raise InputError(f"previous stage has no field {obj['$prev']!r}") from None
        return {k: _resolve(v, prev) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_resolve(v, prev) for v in obj]
    return obj


class StageError(Exception):
    def __init__(self, index, command, exc):
        super().__init__(str(exc))
        self.index, self.command, self.exc = index, command, exc


def run_pipeline(manifest: dict, cfg: Config) -> dict:
    schemas.check("manifest", manifest)
    stages, prev = [], None
    for i, st in enumerate(manifest["stages"]):
        cmd = st["command"]
        try:
            if cmd not in HANDLERS and cmd != "validate":
                raise InputError(f"unknown stage command {cmd!r}")
            inp = _resolve(st.get("input", {}), prev)
            if cmd == "validate":
                result = run_validate(inp, cfg, st.get("args", {}).get("kind"))
            else:
                result = HANDLERS[cmd](inp, cfg)
        except (InputError, VerificationError) as exc:
            raise StageError(i, cmd, exc) from exc
        stages.append({"stage": i, "command": cmd, "input": inp, "result": result})
        prev = result
    return {"stages": stages}


# --- output -------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, Fraction):
        return format_fraction(x)
    if isinstance(x, Angle):
        return format_fraction(x.value)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return x.item()
    return x


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, json.dumps(obj, sort_keys=True) if isinstance(obj, list) else obj


def render(report: dict, fmt: str) -> str:
    report = _jsonable(report)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in _flatten(report):
            w.writerow([k, "" if v is None else v])
        return buf.getvalue()
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _provenance(command: str) -> dict:
    return {"package": "genrep", "version": __version__, "command": command, "prng": "numpy.random.PCG64"}


# --- argument parsing ----------------------------------------------------------------

def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _int_list(text: str):
    if text == "all":
        return "all"
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated element indices, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for sampled modes (numpy PCG64)")
    common.add_argument("--out", choices=("json", "csv"), default="json")
    common.add_argument("--guard-size", type=int, default=2000, help="explosion guard for constructions")
    common.add_argument("--cap", type=int, default=None, help="size cap for exhaustive searches")

    ap = argparse.ArgumentParser(prog="genrep", description="Exact finite models of generic representations.")
    ap.add_argument("--version", action="version", version=f"genrep {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("abgroup", "induce", "katetov", "lzero", "freeprod", "unitary"):
        p = sub.add_parser(name, parents=[common], help=f"run the {name} construction on a JSON input")
        p.add_argument("input", help="JSON input file")
    p = sub.add_parser("oscheck", parents=[common], help="finite oscillation-stability check")
    p.add_argument("--group", required=True, help="JSON metric group (table + dist)")
    p.add_argument("--epsilon", required=True)
    p.add_argument("--A", dest="A", required=True, type=_int_list)
    p.add_argument("--B", dest="B", type=_int_list, default="all")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--search", action="store_true")
    mode.add_argument("--sample", action="store_true")
    p.add_argument("--max-b", type=int, default=12)
    p.add_argument("--trials", type=int, default=1000)
    p = sub.add_parser("pipeline", parents=[common], help="run a manifest of stages")
    p.add_argument("manifest")
    p = sub.add_parser("validate", parents=[common], help="schema check only")
    p.add_argument("input")
    p.add_argument("--kind", choices=sorted(schemas.SCHEMAS), default=None)
    return ap


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    if args.cap is not None and args.cap < 1:
        print("error: --cap must be positive", file=stderr)
        return 2
    cfg = Config(args.seed, args.cap, args.guard_size, args.out)
    report = {"provenance": _provenance(args.command), "config": cfg.to_json()}
    try:
        if args.command == "oscheck":
            inp = {"group": _load(args.group), "epsilon": args.epsilon, "A": args.A, "B": args.B,
                   "mode": "search" if args.search else "sample" if args.sample else "check",
                   "max_b": args.max_b, "trials": args.trials}
            report["input"] = inp
            report["result"] = run_oscheck(inp, cfg)
        elif args.command == "pipeline":
            inp = _load(args.manifest)
            report["input"] = inp
            report["result"] = run_pipeline(inp, cfg)
        elif args.command == "validate":
            inp = _load(args.input)
            report["input"] = inp
            report["result"] = run_validate(inp, cfg, args.kind)
        else:
            inp = _load(args.input)
            report["input"] = inp
            report["result"] = HANDLERS[args.command](inp, cfg)
    except StageError as exc:
        code = 3 if isinstance(exc.exc, VerificationError) else 2
        report["error"] = _error_json(exc.exc) | {"stage": exc.index, "stage_command": exc.command}
        print(f"error in stage {exc.index} ({exc.command}): {exc.exc}", file=stderr)
        stdout.write(render(report, "json"))
        return code
    except InputError as exc:
        report["error"] = _error_json(exc)
        print(f"error: {exc}", file=stderr)
        stdout.write(render(report, "json"))
        return 2
    except VerificationError as exc:
        report["error"] = _error_json(exc)
        print(f"verification failure [{exc.postcondition}]: {exc}", file=stderr)
        stdout.write(render(report, "json"))
        return 3
    except Exception as exc:  # any other failure is a bug, reported like a failed self-check
        report["error"] = {"kind": "verification", "postcondition": "internal.exception",
                           "message": f"{type(exc).__name__}: {exc}"}
        print(f"internal error: {type(exc).__name__}: {exc}", file=stderr)
        stdout.write(render(report, "json"))
        return 3
    stdout.write(render(report, args.out))
    return 0


def _error_json(exc) -> dict:
    if isinstance(exc, VerificationError):
        return {"kind": "verification", "postcondition": exc.postcondition, "message": str(exc)}
    return {"kind": "input", "message": str(exc), "path": getattr(exc, "path", None),
            "witness": _jsonable(getattr(exc, "witness", None))}


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
