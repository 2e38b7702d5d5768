"""
Report builders behind the CLI subcommands.

Each builder takes the effective ``RunConfig`` plus the parsed inputs and
returns a ``Report``: a plain payload for ``core.formatter`` and the exit code
the command should end with (0 verdict true, 1 verdict false).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Tuple

from catalog import parse_element
from core.errors import InputError
from core.homalg import (
    coinvariants,
    group_homology,
    rationalize_tor,
    tor,
    tor_cross_check,
)
from core.pmod import kappa, resolve
from core.specseq import (
    assemble_e2,
    free_homotopy,
    semifree_homotopy,
    sphere_coefficients,
    sphere_family,
    StemsTable,
)
from core.tamemod import (
    SigmaModule,
    TruncIFunctor,
    Verdict,
    check_d_surjective_up_to,
    d_stage,
    eq_up_to,
    exact_filtration,
    filtration_le,
    filtration_report,
    is_semistable_up_to,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """Effective bounds of one CLI run; echoed verbatim into every report."""

    command: str
    inputs: Tuple[str, ...] = ()
    N: int = 4
    L: Optional[int] = None
    p_max: int = 2
    method: Optional[str] = None
    fmt: str = "text"
    stems: Optional[str] = None

    def with_truncation(self, N: int) -> "RunConfig":
        return replace(self, N=N)

    def header(self) -> Dict[str, Any]:
        return {
            "input": " ".join(self.inputs) or None,
            "N": self.N,
            "L": self.L,
            "p_max": self.p_max,
            "method": self.method,
            **({"stems": self.stems} if self.stems else {}),
        }


@dataclass
class Report:
    payload: Dict[str, Any]
    exit_code: int = 0


def _report(cfg: RunConfig, exit_code: int = 0, **sections) -> Report:
    payload: Dict[str, Any] = {"command": cfg.command, "header": cfg.header()}
    payload.update({k: v for k, v in sections.items() if v is not None})
    return Report(payload, exit_code)


def _transposition_text(i: int) -> str:
    return f"({i} {i + 1})"


def _level_rows(F: TruncIFunctor) -> List[dict]:
    return [
        {"level": n, "group": str(g), "generators": g.num_generators}
        for n, g in enumerate(F.levels)
    ]


def _verdict_report(cfg: RunConfig, verdict: Verdict, **sections) -> Report:
    return _report(cfg, 0 if verdict.holds else 1, verdict=verdict.holds, **sections)


# ============ PRESENTATIONS ============

def validate_report(cfg: RunConfig, F: TruncIFunctor) -> Report:
    result = F.validate()
    rows = [
        {
            "severity": issue["level"],
            "relation": issue["relation"],
            "level": issue["level_n"],
            "generators": issue["generators"],
            "message": issue["message"],
        }
        for issue in result["issues"]
    ]
    first = result["first_violation"]
    summary = {"name": F.display_name, "first_violation": first["relation"] if first else None}
    return _report(cfg, 0 if result["valid"] else 1, verdict=result["valid"], summary=summary, rows=rows)


def functor_report(cfg: RunConfig, F: TruncIFunctor, saved: Optional[str] = None) -> Report:
    """Level table of a constructed functor, with its validity."""
    summary = {"name": F.display_name, "valid": F.is_valid, "grade": F.grade}
    if saved:
        summary["saved"] = saved
    return _report(cfg, summary=summary, rows=_level_rows(F))


def colim_report(cfg: RunConfig, F: TruncIFunctor, compare: Optional[Tuple[str, str]] = None) -> Report:
    F.require_valid()
    rows = []
    for n, g in enumerate(F.levels):
        row = {"level": n, "group": str(g)}
        if n < F.N:
            row["iota_injective"] = F.stab[n].is_injective()
            row["iota_surjective"] = F.stab[n].is_surjective()
        rows.append(row)
    summary = {"colimit_estimate": str(F.level(F.N))}
    if compare is None:
        return _report(cfg, summary=summary, rows=rows)
    e1, e2 = (parse_element(F, text) for text in compare)
    eq = eq_up_to(e1, e2)
    summary.update({"left": e1.describe(), "right": e2.describe(), "equality": eq.verdict})
    return _report(cfg, 0 if eq.equal else 1, verdict=eq.equal, summary=summary, rows=rows)


# ============ FILTRATION AND SEMISTABILITY ============

def filtration_report_for(cfg: RunConfig, F: TruncIFunctor, element: Optional[str], k: Optional[int]) -> Report:
    if element is None:
        rows = filtration_report(F)
        coincide = all(r["coincide"] for r in rows)
        return _report(cfg, 0 if coincide else 1, verdict=coincide, rows=rows)
    e = parse_element(F, element)
    exact = exact_filtration(e)
    summary = {
        "element": e.describe(),
        "filtration": exact.value if exact.determined else "undetermined",
        "witness": _transposition_text(exact.witness["transposition"]) if exact.witness else None,
        "bound": exact.bound,
    }
    if not exact.determined:
        summary["interval"] = list(exact.interval)
    if k is None:
        return _report(cfg, summary=summary)
    verdict = filtration_le(e, k)
    summary["at_most"] = k
    summary["determined"] = verdict.determined
    return _verdict_report(cfg, verdict, summary=summary)


def semistable_report(cfg: RunConfig, F: TruncIFunctor) -> Report:
    verdict = is_semistable_up_to(F)
    d_check = check_d_surjective_up_to(F)
    summary: Dict[str, Any] = {"bound": verdict.bound}
    if verdict.witness:
        w = verdict.witness
        summary["witness"] = f"{w['label']} @ {w['level']} moved by {_transposition_text(w['transposition'])}"
    summary["d_surjective"] = d_check.holds
    summary["criteria_agree"] = d_check.holds == verdict.holds
    return _verdict_report(cfg, verdict, summary=summary)


def dstage_report(cfg: RunConfig, F: TruncIFunctor, k: int) -> Report:
    stage = d_stage(F, k)
    isos = stage.isomorphic_stages()
    rows = []
    for j, V in enumerate(stage.stages):
        rows.append({
            "stage": j,
            "N": V.N,
            "levels": [str(g) for g in V.levels],
            "d_iso": isos[j - 1] if j else None,
        })
    return _report(cfg, 0 if stage.is_iso_up_to() else 1, verdict=stage.is_iso_up_to(), rows=rows)


def kappa_report(cfg: RunConfig, n: int) -> Report:
    iso = kappa(n, cfg.N)
    certified = iso.certified
    return _report(cfg, 0 if certified else 1, verdict=certified,
                   summary={"map": f"P({n + 1}) -> induce(P({n}))"}, rows=iso.certificates())


# ============ HOMOLOGICAL ALGEBRA ============

def coinv_report(cfg: RunConfig, F: TruncIFunctor) -> Report:
    result = coinvariants(F)
    rows = [{"level": n, "coinvariants": str(g)} for n, g in enumerate(result.sequence)]
    return _report(cfg, summary={"group": str(result.group), "stabilized": result.stabilized}, rows=rows)


def tor_report(cfg: RunConfig, F: TruncIFunctor) -> Report:
    if cfg.method == "both":
        check = tor_cross_check(F, cfg.p_max, cfg.L)
        agree = check["verdict"] == "AGREE"
        return _report(cfg, 0 if agree else 1, verdict=check["verdict"], rows=check["rows"])
    results = tor(F, cfg.p_max, cfg.method, cfg.L)
    rows = [
        {"degree": r.degree, "value": str(r.value), "stabilized": r.stabilized, "complete": r.complete}
        for r in results
    ]
    ranks = rationalize_tor(results)
    summary = {"collapses_rationally": all(r["rank"] == 0 for r in ranks if r["degree"] >= 1)}
    return _report(cfg, summary=summary, rows=rows)


def ghom_report(cfg: RunConfig, n: int, B: SigmaModule) -> Report:
    values = group_homology(n, B, cfg.p_max)
    rows = [{"degree": p, "value": str(v)} for p, v in enumerate(values)]
    return _report(cfg, summary={"group": f"S{n}", "coefficients": B.name or str(B.group)}, rows=rows)


def resolve_report(cfg: RunConfig, F: TruncIFunctor, degree: int) -> Report:
    R = resolve(F, degree, cfg.L)
    exactness = {row["degree"]: row["exact"] for row in R.verify_exact()}
    rows = [
        {
            "degree": p,
            "term": str(R.terms[p]),
            "complete": R.flags[p]["complete"],
            "gap_level": R.flags[p]["gap_level"],
            "exact": exactness.get(p),
        }
        for p in range(R.length + 1)
    ]
    summary = {
        "generators": [g.describe() for g in R.generators],
        "search_level": R.search_level,
        "exhausted": R.exhausted,
    }
    complete = R.complete_through(R.length)
    return _report(cfg, 0 if complete else 1, verdict=complete, summary=summary, rows=rows)


# ============ E2 PAGE ============

def parse_e2_input(text: str) -> Tuple[str, int]:
    """``free:n``, ``semifree:n`` or ``sphere``."""
    kind, _, arg = text.strip().partition(":")
    if kind == "sphere" and not arg:
        return "free", 0
    if kind in ("free", "semifree") and arg.isdigit():
        return kind, int(arg)
    raise InputError(f"Unknown E2 input {text!r}; expected free:n, semifree:n or sphere")


def e2_report(cfg: RunConfig, spec: str, stems: StemsTable, q_max: int, workers: int = 4) -> Report:
    kind, n = parse_e2_input(spec)
    ks = range(q_max + 1)
    if kind == "free":
        G = free_homotopy(n, sphere_coefficients(n, stems), ks, cfg.N)
    else:
        G = semifree_homotopy(n, sphere_family(n, stems, [k + n for k in ks]), ks, cfg.N)
    page = assemble_e2(G, cfg.p_max, cfg.method or "bar", cfg.L, workers)
    data = page.to_dict()
    summary = {
        "spectrum": spec,
        "stems": stems.source,
        "edge_consistent": data["edge_consistent"],
        "collapses_rationally": data["collapses_rationally"],
    }
    return _report(cfg, summary=summary, page=page.render_text(), cells=data["cells"],
                   differentials=data["differentials"])
