"""Command-line front end: ``cjsr {analyze,compile,jsr,lsr,barabanov,bdf}``.

Exit codes: 0 when the result is fully certified (or the command has nothing
to certify), 2 when only a bracket could be established, 1 on errors.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .bdf import COMPLEX_FLAG, theta_sweep
from .compilers import compile_constraint_document
from .dual import barabanov_multinorm, verify_invariance
from .graphs import (
    CycleCapExceeded,
    enumerate_simple_cycles,
    identify_vertices,
    is_strongly_connected,
    strongly_connected_components,
)
from .lsr import is_stabilizable, run_lsr_polytope, verify_lsr_certificate
from .norms import VertexSet
from .polytope import (
    AlgorithmOptions,
    Bracket,
    Converged,
    ReducibilityWitness,
    Rejected,
    run_invariant_polytope,
    verify_certificate,
)
from .reducibility import FactorizationError, factorize, find_invariant_family
from .smp import NoCycles, SmpCandidate, candidate_from_cycle, check_dominance, find_candidate_smp, find_candidate_smp_min
from .system import (
    MultigraphSystem,
    PathCapExceeded,
    PathError,
    SystemFormatError,
    brute_force_bounds,
    brute_force_lsr_bounds,
    dump_system,
    loads_system,
    system_from_dict,
    system_to_dict,
)

EXIT_OK, EXIT_ERROR, EXIT_BRACKET = 0, 1, 2
BRUTE_K = 8


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str | None = None
    tol: float = 1e-10
    max_iter: int = 40
    max_cycle_len: int = 10
    cone_mode: bool = False
    seed: int = 0
    output: str | None = None
    report_format: str = "text"
    candidate: tuple[str, ...] | None = None
    samples: int = 1000
    prune: bool = False

    def options(self) -> AlgorithmOptions:
        return AlgorithmOptions(tol=self.tol, max_iter=self.max_iter, cone_mode=self.cone_mode, prune_redundant=self.prune)

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("output")
        d.pop("report_format")
        if d["candidate"] is not None:
            d["candidate"] = list(d["candidate"])
        return d


# ---------------------------------------------------------------------------
# JSON helpers


def _clean(obj):
    """Make a report JSON-safe: infinities become the string "inf", arrays become lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def machine_dump(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=1, allow_nan=False) + "\n"


def _float(x) -> float:
    return float("inf") if x == "inf" else float(x)


def _workers() -> int:
    raw = os.environ.get("CJSR_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise SystemFormatError(f"CJSR_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise SystemFormatError(f"CJSR_THREADS must be a positive integer, got {raw!r}")
    return n


def _pmap(fn, items):
    items = list(items)
    n = min(_workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Serialization of outcomes


def _candidate_dict(c: SmpCandidate | None):
    if c is None:
        return None
    return {
        "cycle": list(c.cycle),
        "length": c.length,
        "averaged_value": c.averaged_value,
        "leading_class": c.leading_class,
        "tie": c.tie,
        "tie_with": list(c.tie_with) if c.tie_with else None,
    }


def _certificate_dict(cert: dict) -> dict:
    out = {}
    for vid, V in cert.items():
        if V is None:
            out[vid] = []
            continue
        out[vid] = [{"vertex_id": vid, "coords": list(map(float, x)), "kind": V.kind} for x in V.vectors()]
    return out


def certificate_from_dict(doc: dict) -> dict:
    out = {}
    for vid, items in doc.items():
        if not items:
            out[vid] = None
            continue
        kinds = {it["kind"] for it in items}
        if len(kinds) != 1:
            raise SystemFormatError(f"vertex {vid!r}: mixed vertex-set kinds {sorted(kinds)}")
        out[vid] = VertexSet.from_vectors(kinds.pop().replace("dual_", ""), [it["coords"] for it in items])
    return out


def reverify_leaf(leaf: dict) -> float:
    """Re-check a converged leaf of a machine report using only its system, value and certificate."""
    sys_ = system_from_dict(leaf["system"])
    cert = certificate_from_dict(leaf["certificate"])
    out = Converged(_float(leaf["rho"]), cert, 0, None)
    return verify_certificate(sys_, out)


# ---------------------------------------------------------------------------
# JSR pipeline


def _brute(sys_: MultigraphSystem) -> tuple[float, float]:
    for k in range(BRUTE_K, 0, -1):
        try:
            br = brute_force_bounds(sys_, k)
            return br.lower, br.upper
        except PathCapExceeded:
            continue
    return 0.0, float("inf")


def _candidate_for(sys_: MultigraphSystem, cfg: RunConfig):
    if cfg.candidate:
        ids = set(e.id for e in sys_.edges)
        if set(cfg.candidate) <= ids:
            try:
                return candidate_from_cycle(sys_, cfg.candidate)
            except PathError:
                pass
    return find_candidate_smp(sys_, cfg.max_cycle_len)


def _leaf_report(sys_: MultigraphSystem, cfg: RunConfig, depth: int) -> dict:
    node = {"type": "leaf", "system": system_to_dict(sys_)}
    if not sys_.edges:
        node.update(status="acyclic", rho=0.0, lower=0.0, upper=0.0, reason="no edges: no closed paths")
        return node
    try:
        cand = _candidate_for(sys_, cfg)
    except CycleCapExceeded as exc:
        lo, up = _brute(sys_)
        node.update(status="bracket", lower=lo, upper=up, reason=str(exc))
        return node
    if isinstance(cand, NoCycles):
        node.update(status="acyclic", rho=0.0, lower=0.0, upper=0.0, reason=cand.reason)
        return node
    node["candidate"] = _candidate_dict(cand)
    if cand.averaged_value == 0:
        lo, up = _brute(sys_)
        node.update(status="bracket", lower=0.0, upper=up, reason="candidate cycle is nilpotent")
        return node
    if cfg.cone_mode and not sys_.is_nonnegative():
        raise SystemFormatError("--cone needs componentwise nonnegative matrices")
    out = run_invariant_polytope(sys_, cand, cfg.options())
    if isinstance(out, ReducibilityWitness):
        try:
            return _factor_node(sys_, out.family, cfg, depth, source="polytope_span")
        except FactorizationError as exc:
            lo, up = _brute(sys_)
            node.update(status="bracket", lower=max(lo, cand.averaged_value), upper=up, reason=f"span witness unusable: {exc}")
            node["lower"] = min(node["lower"], node["upper"])
            return node
    if isinstance(out, Converged):
        node.update(
            status="converged",
            rho=out.rho,
            lower=out.rho,
            upper=out.rho,
            iterations=out.iterations,
            flagged=out.flagged,
            vertex_counts={vid: (V.size if V is not None else 0) for vid, V in out.certificate.items()},
            certificate=_certificate_dict(out.certificate),
            residual=verify_certificate(sys_, out),
        )
        dom = check_dominance(sys_, cand, cfg.max_cycle_len)
        node["dominance"] = {"q": dom.q, "cycle": list(dom.cycle) if dom.cycle else None}
        return node
    if isinstance(out, Bracket):
        node.update(status="bracket", lower=out.lower, upper=out.upper, iterations=out.iterations, reason=out.reason)
        lo, up = _brute(sys_)
        node["upper"] = min(node["upper"], up)
        return node
    assert isinstance(out, Rejected)
    lo, up = _brute(sys_)
    node.update(status="rejected", reason=out.reason, detail=out.detail, lower=max(lo, cand.averaged_value), upper=up)
    node["lower"] = min(node["lower"], node["upper"])
    return node


def _factor_node(sys_: MultigraphSystem, fam, cfg: RunConfig, depth: int, source: str) -> dict:
    fac = factorize(sys_, fam)
    children = [_solve(c, cfg, depth + 1) for c in fac.children]
    return {
        "type": "factorization",
        "source": source,
        "bases": {vid: {"restricted": Q, "complement": P} for vid, (Q, P) in fac.bases.items()},
        "children": children,
        **_aggregate(children),
    }


def _solve(sys_: MultigraphSystem, cfg: RunConfig, depth: int = 0, parallel: bool = False) -> dict:
    if depth > 4 * sys_.total_dim + 8:
        raise FactorizationError("decomposition recursion is too deep")
    scc = strongly_connected_components(sys_)
    if len(scc.components) > 1:
        fn = lambda sub: _solve(sub, cfg, depth + 1)  # noqa: E731
        children = _pmap(fn, scc.subsystems) if parallel else [fn(s) for s in scc.subsystems]
        return {
            "type": "scc",
            "components": [list(c) for c in scc.components],
            "cross_edges": list(scc.cross_edges),
            "children": children,
            **_aggregate(children),
        }
    if sys_.edges:
        fam = find_invariant_family(sys_, seed=cfg.seed)
        if fam is not None:
            return _factor_node(sys_, fam, cfg, depth, source="witness_search")
    return _leaf_report(sys_, cfg, depth)


def _aggregate(children: list[dict]) -> dict:
    """rho of a decomposed system is the max over its parts."""
    certified = all(c["status"] in ("converged", "acyclic") for c in children)
    lower = max(c["lower"] for c in children)
    upper = max(c["upper"] for c in children)
    if certified:
        rho = max(c["rho"] for c in children)
        return {"status": "converged", "rho": rho, "lower": rho, "upper": rho}
    return {"status": "bracket", "lower": lower, "upper": upper}


def _leaves(node: dict) -> list[dict]:
    if node["type"] == "leaf":
        return [node]
    out = []
    for c in node["children"]:
        out.extend(_leaves(c))
    return out


def solve_jsr(sys_: MultigraphSystem, cfg: RunConfig) -> dict:
    return _solve(sys_, cfg, 0, parallel=True)


# ---------------------------------------------------------------------------
# Commands


def _read(path: str) -> tuple[bytes, str]:
    with open(path, "rb") as fh:
        raw = fh.read()
    return raw, hashlib.sha256(raw).hexdigest()


def _base_report(cfg: RunConfig, digest: str | None) -> dict:
    return {"tool": "cjsr", "version": __version__, "command": cfg.command, "input_sha256": digest, "config": cfg.echo()}


def cmd_jsr(cfg: RunConfig) -> tuple[int, dict, str]:
    raw, digest = _read(cfg.input)
    sys_ = loads_system(raw.decode("utf-8"))
    t0 = time.perf_counter()
    tree = solve_jsr(sys_, cfg)
    elapsed = time.perf_counter() - t0
    rep = _base_report(cfg, digest)
    rep["tree"] = tree
    rep["result"] = {k: tree[k] for k in ("status", "lower", "upper") + (("rho",) if "rho" in tree else ())}
    code = EXIT_OK if tree["status"] in ("converged", "acyclic") else EXIT_BRACKET
    return code, rep, _jsr_text(rep, elapsed)


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return f"{x:.10g}"


def _jsr_text(rep: dict, elapsed: float) -> str:
    tree = rep["tree"]
    lines = []
    res = rep["result"]
    if res["status"] in ("converged", "acyclic"):
        lines.append(f"spectral radius: {_fmt(res['rho'])} (certified)")
    else:
        lines.append(f"spectral radius in [{_fmt(res['lower'])}, {_fmt(res['upper'])}] (bracket only)")
    for idx, leaf in enumerate(_leaves(tree)):
        verts = ", ".join(f"{v['id']}:{v['dim']}" for v in leaf["system"]["vertices"])
        lines.append(f"leaf {idx}: vertices [{verts}], status {leaf['status']}")
        cand = leaf.get("candidate")
        if cand:
            lines.append(
                f"  candidate cycle ({cand['length']} edges): {' '.join(cand['cycle'])}; "
                f"averaged radius {_fmt(cand['averaged_value'])}, leading eigenvalue {cand['leading_class']}"
            )
        if leaf["status"] == "converged" and "iterations" in leaf:
            counts = ", ".join(f"{k}: {v}" for k, v in leaf["vertex_counts"].items())
            lines.append(f"  invariant polytopes after {leaf['iterations']} step(s); vertices per space {counts}")
            lines.append(f"  certificate residual {_fmt(leaf['residual'])}; dominance ratio {_fmt(leaf['dominance']['q'])}")
        elif leaf["status"] != "converged":
            lines.append(f"  [{_fmt(leaf['lower'])}, {_fmt(leaf['upper'])}] {leaf.get('reason', '')}")
    lines.append(f"wall time {elapsed:.3f} s")
    return "\n".join(lines) + "\n"


def cmd_analyze(cfg: RunConfig) -> tuple[int, dict, str]:
    raw, digest = _read(cfg.input)
    sys_ = loads_system(raw.decode("utf-8"))
    scc = strongly_connected_components(sys_)
    comps = []
    for members, sub in zip(scc.components, scc.subsystems):
        info = {"vertices": list(members), "edges": [e.id for e in sub.edges]}
        if sub.edges:
            try:
                info["cycle_count"] = len(enumerate_simple_cycles(sub, cfg.max_cycle_len))
            except CycleCapExceeded as exc:
                info["cycle_count"] = None
                info["cycle_note"] = str(exc)
            try:
                cand = find_candidate_smp(sub, cfg.max_cycle_len)
            except CycleCapExceeded:
                cand = None
            if isinstance(cand, SmpCandidate):
                info["candidate"] = _candidate_dict(cand)
                if cand.averaged_value > 0:
                    dom = check_dominance(sub, cand, cfg.max_cycle_len)
                    info["dominance"] = {"q": dom.q, "cycle": list(dom.cycle) if dom.cycle else None}
            fam = find_invariant_family(sub, seed=cfg.seed)
            info["invariant_family_dims"] = fam.dims() if fam is not None else None
            lo, up = _brute(sub)
            info["brute_force"] = {"lower": lo, "upper": up}
        comps.append(info)
    ident = identify_vertices(sys_)
    rep = _base_report(cfg, digest)
    rep.update(
        vertices=len(sys_.vertices),
        edges=len(sys_.edges),
        strongly_connected=is_strongly_connected(sys_),
        components=comps,
        identified_vertices=len(ident.vertices),
    )
    lines = [f"{len(sys_.vertices)} vertices, {len(sys_.edges)} edges, {len(comps)} strong component(s)"]
    for i, c in enumerate(comps):
        lines.append(f"component {i}: {c['vertices']}")
        if "candidate" in c:
            cd = c["candidate"]
            lines.append(f"  candidate {' '.join(cd['cycle'])} value {_fmt(cd['averaged_value'])} ({cd['leading_class']})")
        if c.get("invariant_family_dims"):
            lines.append(f"  reducible: invariant family dims {c['invariant_family_dims']}")
        if "brute_force" in c:
            lines.append(f"  brute-force bracket [{_fmt(c['brute_force']['lower'])}, {_fmt(c['brute_force']['upper'])}]")
    lines.append(f"vertices after identification: {len(ident.vertices)}")
    return EXIT_OK, rep, "\n".join(lines) + "\n"


def cmd_compile(cfg: RunConfig) -> tuple[int, dict, str]:
    raw, digest = _read(cfg.input)
    try:
        doc = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise SystemFormatError(f"constraint file is not valid JSON: {exc}") from None
    sys_ = compile_constraint_document(doc)
    text = dump_system(sys_) + "\n"
    return EXIT_OK, system_to_dict(sys_), text


def cmd_lsr(cfg: RunConfig) -> tuple[int, dict, str]:
    raw, digest = _read(cfg.input)
    sys_ = loads_system(raw.decode("utf-8"))
    opts = cfg.options()
    scc = strongly_connected_components(sys_)

    def component(sub):
        info = {"vertices": list(sub.vertex_ids)}
        cand = find_candidate_smp_min(sub, cfg.max_cycle_len)
        if isinstance(cand, NoCycles):
            info["status"] = "acyclic"
            return info
        info["candidate"] = _candidate_dict(cand)
        if sub.is_nonnegative():
            out = run_lsr_polytope(sub, cand, opts)
            info["status"] = out.kind
            if isinstance(out, Converged):
                info["rho_lower"] = out.rho
                info["iterations"] = out.iterations
                info["certificate"] = _certificate_dict(out.certificate)
                info["residual"] = verify_lsr_certificate(sub, out) if out.rho > 0 else None
            elif isinstance(out, Bracket):
                info.update(lower=out.lower, upper=out.upper, reason=out.reason)
            else:
                info.update(reason=out.reason, detail=out.detail)
        else:
            info["status"] = "sign_indefinite"
            try:
                br = brute_force_lsr_bounds(sub, BRUTE_K)
                info.update(lower=br.lower, upper=br.upper)
            except (PathCapExceeded, ValueError) as exc:
                info["reason"] = str(exc)
        return info

    comps = _pmap(component, [s for s in scc.subsystems if s.edges])
    verdict = is_stabilizable(sys_, opts, cfg.max_cycle_len)
    rep = _base_report(cfg, digest)
    rep["components"] = comps
    rep["verdict"] = asdict(verdict)
    lines = [f"stabilizability: {verdict.status} (lower spectral radius in [{_fmt(verdict.lower)}, {_fmt(verdict.upper)}])", f"  {verdict.reason}"]
    for c in comps:
        line = f"component {c['vertices']}: {c['status']}"
        if "rho_lower" in c:
            line += f", lower spectral radius {_fmt(c['rho_lower'])}"
        lines.append(line)
    code = EXIT_BRACKET if verdict.status == "unknown" else EXIT_OK
    return code, rep, "\n".join(lines) + "\n"


def cmd_barabanov(cfg: RunConfig) -> tuple[int, dict, str]:
    raw, digest = _read(cfg.input)
    sys_ = loads_system(raw.decode("utf-8"))
    if not is_strongly_connected(sys_):
        raise SystemFormatError("barabanov needs a strongly connected system; split it with `cjsr analyze` first")
    cand = _candidate_for(sys_, cfg)
    if isinstance(cand, NoCycles):
        raise SystemFormatError(cand.reason)
    opts = cfg.options()
    primal = run_invariant_polytope(sys_, cand, opts)
    rep = _base_report(cfg, digest)
    rep["candidate"] = _candidate_dict(cand)
    rep["primal"] = {"status": primal.kind, "rho": getattr(primal, "rho", None)}
    mn = barabanov_multinorm(sys_, opts, cfg.max_cycle_len, candidate=cand)
    if not hasattr(mn, "functionals"):
        rep["dual"] = {"status": mn.kind, "detail": getattr(mn, "reason", "")}
        return EXIT_BRACKET, rep, f"dual run did not converge ({mn.kind}); no Barabanov multinorm\n"
    resid = verify_invariance(sys_, mn, cfg.samples, cfg.seed)
    rep["dual"] = {"status": "converged", "rho": mn.rho, "iterations": mn.dual_outcome.iterations}
    rep["multinorm"] = {
        vid: [{"vertex_id": vid, "coords": list(map(float, U[:, i])), "kind": "dual_absco"} for i in range(U.shape[1])]
        for vid, U in mn.functionals.items()
    }
    rep["invariance_residual"] = resid
    rep["samples"] = cfg.samples
    text = (
        f"Barabanov multinorm from the dual run: value {_fmt(mn.rho)}\n"
        f"  functionals per space: {', '.join(f'{k}: {v.shape[1]}' for k, v in mn.functionals.items())}\n"
        f"  invariance residual over {cfg.samples} samples per space: {_fmt(resid)}\n"
    )
    primal_ok = isinstance(primal, Converged)
    return (EXIT_OK if primal_ok else EXIT_BRACKET), rep, text


def cmd_bdf(cfg: RunConfig, steps: int, ratios: str, lo: float, hi: float, step: float) -> tuple[int, dict, str]:
    res = theta_sweep(steps, ratios, (lo, hi), step, AlgorithmOptions(tol=cfg.tol, max_iter=min(cfg.max_iter, 20), max_vertices=400))
    rep = _base_report(cfg, None)
    rep["bdf"] = {"steps": steps, "ratios": ratios, "theta_min": lo, "theta_max": hi, "theta_step": step}
    rep["rows"] = [asdict(r) for r in res.rows]
    rep["crossing"] = res.crossing
    rep["limitation"] = COMPLEX_FLAG if any(r.leading_class == "complex_pair" for r in res.rows) else None
    lines = [f"{'theta':>10} {'rho(C)':>12} {'class':>14} verdict"]
    for r in res.rows:
        lines.append(f"{r.theta:10.5f} {r.rho:12.8f} {r.leading_class:>14} {r.verdict}")
    lines.append(f"crossing of rho = 1: {_fmt(res.crossing) if res.crossing is not None else 'none in range'}")
    if rep["limitation"]:
        lines.append(f"note: {COMPLEX_FLAG}")
    return EXIT_OK, rep, "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cjsr", description="Constrained joint spectral radius of systems on multigraphs.")
    parser.add_argument("--version", action="version", version=f"cjsr {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--max-iter", type=int, default=40)
    common.add_argument("--max-cycle-len", type=int, default=10)
    common.add_argument("--cone", action="store_true", help="monotone-norm variant for nonnegative systems")
    common.add_argument("--prune", action="store_true", help="drop certificate vertices inside the hull of the others")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("text", "machine"), default="text")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, hlp in (
        ("analyze", "strong components, cycles, candidates, reducibility"),
        ("compile", "constraint file to system file"),
        ("jsr", "certify the joint spectral radius"),
        ("lsr", "lower spectral radius and stabilizability"),
        ("barabanov", "invariant multinorm from the dual system"),
    ):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("input")
        if name in ("jsr", "barabanov"):
            p.add_argument("--candidate", default=None, help="comma-separated edge ids of a closed path")
        if name == "barabanov":
            p.add_argument("--samples", type=int, default=1000)
    p = sub.add_parser("bdf", parents=[common], help="variable-stepsize BDF zero-stability sweep")
    p.add_argument("--steps", type=int, choices=(3, 4), required=True)
    p.add_argument("--ratios", default="1/theta,1,theta")
    p.add_argument("--theta-min", type=float, required=True)
    p.add_argument("--theta-max", type=float, required=True)
    p.add_argument("--theta-step", type=float, required=True)
    return parser


def _config(args) -> RunConfig:
    cand = tuple(x.strip() for x in args.candidate.split(",") if x.strip()) if getattr(args, "candidate", None) else None
    return RunConfig(
        command=args.command,
        input=getattr(args, "input", None),
        tol=args.tol,
        max_iter=args.max_iter,
        max_cycle_len=args.max_cycle_len,
        cone_mode=args.cone,
        seed=args.seed,
        output=args.out,
        report_format=args.format,
        candidate=cand,
        samples=getattr(args, "samples", 1000),
        prune=args.prune,
    )


def run(argv=None) -> tuple[int, str, str | None]:
    """Parse arguments, run the command, return (exit code, rendered report, output path)."""
    args = build_parser().parse_args(argv)
    cfg = _config(args)
    _workers()  # reject a malformed CJSR_THREADS before any work starts
    if cfg.command == "bdf":
        code, rep, text = cmd_bdf(cfg, args.steps, args.ratios, args.theta_min, args.theta_max, args.theta_step)
    else:
        handler = {"jsr": cmd_jsr, "lsr": cmd_lsr, "analyze": cmd_analyze, "compile": cmd_compile, "barabanov": cmd_barabanov}[cfg.command]
        code, rep, text = handler(cfg)
    if cfg.command == "compile":
        rendered = text
    else:
        rendered = machine_dump(rep) if cfg.report_format == "machine" else text
    return code, rendered, cfg.output


def main(argv=None) -> int:
    try:
        code, rendered, out = run(argv)
        if out:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(rendered)
        else:
            sys.stdout.write(rendered)
        return code
    except SystemExit as exc:  # argparse
        return int(exc.code) if isinstance(exc.code, int) else EXIT_ERROR
    except (OSError, SystemFormatError, PathError, ValueError, RuntimeError) as exc:
        sys.stderr.write(f"cjsr: error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
