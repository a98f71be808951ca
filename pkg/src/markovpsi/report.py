"""Run configuration, the verification pipeline and report rendering."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from . import lift as lift_mod
from .arborescence import kirchhoff_sum
from .lift import LiftedChain, build_lift
from .markov_graph import (
    RateGraph,
    build_complete,
    build_ring,
    rate_matrix,
    read_graph,
    symmetric_minor,
)
from .polyring import DEFAULT_PRIME, Monomial, VarId, format_poly
from .psi import (
    FactorReport,
    chapuy_claim,
    compute_psi,
    degree_identity_check,
    distinguished_monomial_check,
    factor_into_minors,
    pit_verify,
    rho,
    ring_claim,
)

log = logging.getLogger(__name__)

PRIME_ENV = "MARKOVPSI_PRIME"
DEFAULT_CUTOFF = 30
CHECK_NAMES = (
    "pi_invariance",
    "lift_irreducible",
    "kirchhoff",
    "lemma_covfor",
    "distinguished_monomial",
    "degree_identity",
    "psi_degree",
)

# Letters used for the three-state chain: Q = [[., a, w], [u, ., b], [c, v, .]].
N3_ALIASES = {
    VarId(1, 2): "a", VarId(2, 3): "b", VarId(3, 1): "c",
    VarId(2, 1): "u", VarId(3, 2): "v", VarId(1, 3): "w",
}
# Tree order of the three-state example, each tree written as its weight.
N3_LETTER_ORDER = ("cu", "uv", "bc", "av", "ac", "vw", "uw", "bw", "ab")

EXIT_OK, EXIT_FAILED, EXIT_INFEASIBLE = 0, 1, 2


class ConfigError(ValueError):
    pass


def default_prime() -> int:
    env = os.environ.get(PRIME_ENV)
    return int(env) if env else DEFAULT_PRIME


@dataclass
class RunConfig:
    family: str | None = "ring"
    n: int | None = 3
    graph_file: str | None = None
    mode: str = "auto"
    witnesses: str = "first"
    trials: int = 20
    prime: int = field(default_factory=default_prime)
    seed: int = 0
    cutoff: int = DEFAULT_CUTOFF
    specialize: tuple[VarId, ...] = ()
    claim: str | None = None
    custom_claim: dict[int, int] | None = None
    checks: tuple[str, ...] = CHECK_NAMES
    output: str = "human"
    figure_dir: str | None = None

    def build_graph(self) -> RateGraph:
        if self.graph_file:
            return read_graph(self.graph_file)
        if self.family == "ring":
            return build_ring(self.n)
        if self.family == "complete":
            return build_complete(self.n)
        raise ConfigError(f"unknown family {self.family!r}")


def aliases_for(g: RateGraph) -> dict[VarId, str] | None:
    return N3_ALIASES if g.n == 3 and g.edges <= set(N3_ALIASES) else None


def letter_order(lc: LiftedChain) -> list[int]:
    """Tree indices in the three-state example's order (complete graph on 3 vertices)."""
    inv = {name: v for v, name in N3_ALIASES.items()}
    order = []
    for word in N3_LETTER_ORDER:
        mono = Monomial.product(inv[ch] for ch in word)
        order.append(lc.find(mono))
    return order


def resolve_claim(cfg: RunConfig, g: RateGraph) -> tuple[str | None, dict[int, int] | None]:
    name = cfg.claim
    if name is None:
        name = "ring" if g.is_ring() else "chapuy" if g.name == "complete" and g.n >= 3 else None
    if name is None:
        return None, None
    if name == "ring":
        return name, ring_claim(g.n)
    if name == "chapuy":
        return name, chapuy_claim(g.n)
    if name == "custom":
        if not cfg.custom_claim:
            raise ConfigError("--claim custom needs --exponents")
        return name, dict(cfg.custom_claim)
    raise ConfigError(f"unknown claim {name!r}")


def _graph_obj(g: RateGraph) -> dict:
    return {"family": g.name, "n": g.n, "edges": [[e.source, e.target] for e in g.sorted_edges]}


def run_checks(lc: LiftedChain, names, rho_nn=None) -> dict[str, bool | None]:
    g = lc.graph
    out: dict[str, bool | None] = {}
    for name in names:
        if name == "pi_invariance":
            out[name] = lift_mod.pi_invariance_check(lc)
        elif name == "lift_irreducible":
            out[name] = lift_mod.lift_irreducibility_check(lc)
        elif name == "kirchhoff":
            Q = rate_matrix(g)
            out[name] = lift_mod.projection_check(lc) and all(
                kirchhoff_sum(g, i) == symmetric_minor(Q, {i}) for i in g.vertices
            )
        elif name == "lemma_covfor":
            out[name] = lift_mod.lemma_forest_check(lc) if g.is_ring() else None
        elif name == "distinguished_monomial":
            if g.is_ring() and rho_nn is not None:
                out[name] = distinguished_monomial_check(lc, rho_nn)
            else:
                out[name] = None
        elif name == "degree_identity":
            out[name] = degree_identity_check(g.n) if g.n >= 3 else None
    return out


def run_verify(cfg: RunConfig) -> tuple[dict, int]:
    """Build, lift, compute Psi (symbolically or by PIT) and run the requested checks."""
    g = cfg.build_graph()
    g.require_irreducible()
    lc = build_lift(g)
    warnings: list[str] = []
    mode = cfg.mode
    if mode == "auto":
        mode = "symbolic" if lc.size <= cfg.cutoff else "pit"
        if mode == "pit":
            msg = f"|T|={lc.size} exceeds symbolic cutoff {cfg.cutoff}; using PIT"
            log.warning(msg)
            warnings.append(msg)
    elif mode == "symbolic" and lc.size > cfg.cutoff:
        report = {
            "graph": _graph_obj(g), "mode": mode, "tree_count": lc.size,
            "error": f"|T|={lc.size} exceeds symbolic cutoff {cfg.cutoff}",
        }
        return report, EXIT_INFEASIBLE
    claim_name, claim = resolve_claim(cfg, g)
    specialize = {v: 1 for v in cfg.specialize}
    for v in specialize:
        if v not in g.edges:
            raise ConfigError(f"cannot specialize {v}: not an edge")

    report: dict = {
        "graph": _graph_obj(g),
        "mode": mode,
        "tree_count": lc.size,
        "claim": None if claim is None else {
            "name": claim_name, "exponents": {str(k): e for k, e in sorted(claim.items())}
        },
        "specialized": [str(v) for v in sorted(specialize)] or None,
        "warnings": warnings,
    }
    if specialize:
        warnings.append("specialized run: supports but does not prove a factorization")

    checks = [c for c in CHECK_NAMES if c in cfg.checks]
    rho_nn = None
    if mode == "symbolic":
        if cfg.witnesses == "all":
            witnesses = list(range(lc.size))
        else:
            witnesses = [lc.first_of_root(1)]
        psi = compute_psi(lc, witnesses, specialize)
        fr = factor_into_minors(psi, g, specialize=specialize)
        report.update(_factor_fields(psi, fr))
        report["witnesses"] = witnesses
        report["pit"] = None
        verdict = None if claim is None else ("match" if fr.matches_claim(claim) else "refuted")
        if g.is_ring() and "distinguished_monomial" in checks and not specialize:
            rho_nn = rho(lc, lift_mod.ring_tree_index(lc)[g.n, g.n])
    else:
        if claim is None:
            raise ConfigError("PIT mode needs a claim (--claim ring|chapuy|custom)")
        res = pit_verify(lc, claim, cfg.trials, cfg.prime, cfg.seed, witness=lc.first_of_root(1))
        report["psi_degree"] = lc.size - g.n
        report["multiplicities"] = []
        report["residual"] = None
        report["pit"] = {
            "prime": res.prime, "trials": res.trials, "seed": res.seed,
            "failures": res.failures, "verdict": res.verdict, "witness": res.witness,
            "redraws": res.redraws,
            "degree_bound": res.degree_bound,
            "error_bound_log10": round(res.error_bound_log10, 6),
            "failing_assignment": res.failing_assignment,
        }
        verdict = res.verdict
    report["verdict"] = verdict

    results = run_checks(lc, checks, rho_nn)
    if "psi_degree" in checks:
        results["psi_degree"] = (
            report["psi_degree"] == lc.size - g.n if mode == "symbolic" and not specialize else None
        )
    report["checks"] = results

    failed = any(v is False for v in results.values()) or verdict == "refuted"
    if cfg.figure_dir:
        from .plotting import write_figures

        report["figures"] = write_figures(lc, report, cfg.figure_dir)
    return report, EXIT_FAILED if failed else EXIT_OK


def _factor_fields(psi, fr: FactorReport) -> dict:
    return {
        "psi_degree": psi.degree(),
        "psi_terms": len(psi),
        "leading_coefficient": fr.leading_coefficient,
        "multiplicities": [
            {"subset": list(S), "rank": len(S), "exponent": e}
            for S, e in fr.multiplicities.items()
        ],
        "residual": str(fr.residual),
        "clean": fr.clean,
        "order_independent": fr.order_independent,
    }


def to_json(report: Mapping) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def to_human(report: Mapping) -> str:
    g = report["graph"]
    lines = [f"graph: {g['family']} n={g['n']} edges={len(g['edges'])}",
             f"trees |T|: {report['tree_count']}",
             f"mode: {report['mode']}"]
    if "error" in report:
        lines.append(f"error: {report['error']}")
        return "\n".join(lines) + "\n"
    lines.append(f"psi degree: {report['psi_degree']}")
    if report["mode"] == "symbolic":
        factors = [
            f"det(-Q[{','.join(map(str, m['subset']))}])^{m['exponent']}"
            for m in report["multiplicities"] if m["exponent"]
        ]
        lines.append("factors: " + (" * ".join(factors) or "(none)"))
        lines.append(f"residual: {report['residual']}")
    if report.get("claim"):
        exps = ", ".join(f"m_{k}^{e}" for k, e in report["claim"]["exponents"].items())
        lines.append(f"claim ({report['claim']['name']}): {exps}")
    if report.get("pit"):
        pit = report["pit"]
        lines.append(
            f"pit: {pit['trials']} trials mod {pit['prime']} seed {pit['seed']}: "
            f"{pit['failures']} failures, log10 error bound {pit['error_bound_log10']}"
        )
        if pit["failing_assignment"]:
            lines.append(f"failing assignment: {pit['failing_assignment']}")
    if report.get("verdict"):
        lines.append(f"verdict: {report['verdict']}")
    for name, ok in report["checks"].items():
        lines.append(f"check {name}: {'n/a' if ok is None else 'PASS' if ok else 'FAIL'}")
    for w in report.get("warnings", []):
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def format_matrix(M, names=None) -> str:
    cells = [[format_poly(x, names) for x in row] for row in M.entries]
    width = max(len(c) for row in cells for c in row)
    return "\n".join(" ".join(c.rjust(width) for c in row) for row in cells) + "\n"


def write_report(report: Mapping, fmt: str, path: str | None = None) -> str:
    text = to_json(report) if fmt == "json" else to_human(report)
    if path:
        Path(path).write_text(text, encoding="utf-8")
    return text
