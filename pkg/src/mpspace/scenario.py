"""Scenario files: named germs and curve models plus a list of tasks with expected values.

A task is ``{"id", "op", "args", "expected"?, "provenance"?, "assumptions"?, "after"?}``.
String arguments of the form ``"@task.field"`` are replaced by a field of an
earlier task's result, which also orders the tasks.
"""
from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

from . import __version__
from .errors import MpspaceError, NotZeroDimensional
from .groebner import set_modular_filter, FILTER_STATS
from .icss import (AltChainComplex0, ConstraintLedger, alt0_differentials, alt0_page, equal_up_to_signs,
                   ledger_solve, turn_pages)
from .ideals import DEFAULT_CAP_N, Ideal, colength, local_colength, rational_points, same_zero_set
from .invariants import (branched_cover_euler, image_equation, isotype_dims, lefschetz_solve, mu_image,
                         relative_critical_ideal, siersma_count, t1_dimension, vd_infinity)
from .modules import PolyMatrix, PresentedModule, fitting_ideal, minor_list, pushforward_presentation
from .multipoint import (MapGerm, MultiGerm, corank1_dk_ideal, multigerm_dk_points, ramification_ideal,
                         shadow_ideal, sigma11_ideal)
from .poly import Polynomial, Ring, format_rational, to_rational
from .series import BranchParam, delta_invariant, milnor_from_delta


class ScenarioError(MpspaceError):
    """Malformed scenario file or unresolvable reference."""


ASSUMPTIONS = {
    "houston-concentration": "alternating homology of the multiple point spaces of a stable "
                             "perturbation sits in middle dimension",
    "greuel-steenbrink-h1": "H_1 of the Milnor fibre of a normal surface singularity vanishes",
    "siersma-wedge": "the image of a stable perturbation is a wedge of spheres counted by the "
                     "critical points leaving the zero level",
}


# --------------------------------------------------------------------------
# value wrappers deciding how a result is compared with an expected value


@dataclass
class ZeroSet:
    """An ideal compared with expected generators by zero set, not equality."""

    ideal: Ideal


@dataclass
class UpToSigns:
    """A matrix compared up to signs of basis vectors."""

    rows: list


def to_json(v):
    if isinstance(v, Ideal):
        return sorted(str(g) for g in v.groebner_basis())
    if isinstance(v, ZeroSet):
        return [str(g) for g in v.ideal.gens]
    if isinstance(v, UpToSigns):
        return [[to_json(x) for x in r] for r in v.rows]
    if isinstance(v, Polynomial):
        return str(v)
    if isinstance(v, dict):
        return {str(k): to_json(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [to_json(x) for x in v]
    if isinstance(v, bool) or v is None or isinstance(v, (str, int)):
        return v
    try:
        q = to_rational(v)
    except (TypeError, ValueError):
        return str(v)
    return int(q) if q.denominator == 1 else format_rational(q)


def matches(value, expected) -> bool:
    if isinstance(value, Ideal):
        return value == Ideal(value.ring, [value.ring(g) for g in expected])
    if isinstance(value, ZeroSet):
        return same_zero_set(value.ideal, Ideal(value.ideal.ring, [value.ideal.ring(g) for g in expected]))
    if isinstance(value, UpToSigns):
        conv = [[to_rational(x) for x in r] for r in expected]
        return equal_up_to_signs(value.rows, conv)
    if isinstance(value, dict) and isinstance(expected, dict):
        return all(str(k) in {str(x) for x in value} and matches(_get(value, k), e) for k, e in expected.items())
    if isinstance(value, (list, tuple)) and isinstance(expected, (list, tuple)):
        return len(value) == len(expected) and all(matches(a, b) for a, b in zip(value, expected))
    return to_json(value) == expected


def _get(d: dict, key):
    for k, v in d.items():
        if str(k) == str(key):
            return v
    raise KeyError(key)


# --------------------------------------------------------------------------
# scenario objects


@dataclass
class Context:
    """Named definitions of a scenario, built on demand."""

    definitions: dict
    cap_N: int = DEFAULT_CAP_N
    assumptions: dict = field(default_factory=dict)
    _germs: dict = field(default_factory=dict)

    def germ(self, name: str) -> MapGerm:
        if name in self._germs:
            return self._germs[name]
        spec = self.definitions.get("germs", {}).get(name)
        if spec is None:
            raise ScenarioError(f"unknown germ {name!r}")
        if "from" in spec:
            g = self.germ(spec["from"]).specialise(spec.get("specialise", {}))
        else:
            g = MapGerm.build(spec["source"], spec["target"], spec["components"],
                              params=spec.get("params", ()), source_weights=spec.get("weights"),
                              distinguished=spec.get("distinguished"), name=name,
                              unfolding=spec.get("unfolding"))
        self._germs[name] = g
        return g

    def branches(self, ref) -> BranchParam:
        spec = ref
        if isinstance(ref, str):
            spec = self.definitions.get("branches", {}).get(ref)
            if spec is None:
                raise ScenarioError(f"unknown branch model {ref!r}")
        return BranchParam.from_strings(spec["variables"], [(b[0], b[1]) for b in spec["branches"]])

    def ring_of(self, spec: dict) -> Ring:
        if "germ" in spec:
            g = self.germ(spec["germ"])
            return g.target if spec.get("side") == "target" else g.source
        return Ring(spec["variables"])

    def ideal(self, spec: dict, ring: Ring | None = None) -> Ideal:
        ring = ring or self.ring_of(spec)
        return Ideal(ring, [ring(s) for s in spec["gens"]])

    def flag(self, name: str) -> bool:
        return bool(self.assumptions.get(name, True))


@dataclass
class Outcome:
    values: dict
    certificates: dict = field(default_factory=dict)
    assumptions: list = field(default_factory=list)


@dataclass
class Op:
    name: str
    run: Callable[[Context, dict], Outcome]
    steps: list
    anchors: list


OPS: dict[str, Op] = {}


def op(name: str, steps: list, anchors: list):
    def deco(fn):
        OPS[name] = Op(name, fn, steps, anchors)
        return fn
    return deco


def _basis(a: dict):
    return a["basis"]


def _double_locus_equation(F: MapGerm, basis) -> Polynomial:
    P = pushforward_presentation(F, basis)
    gb = F.pullback_ideal(fitting_ideal(P, 1)).groebner_basis()
    if len(gb) != 1:
        raise MpspaceError("the double locus ideal is not principal")
    return gb[0]


def _equation(F: MapGerm, a: dict) -> Polynomial:
    kind = a.get("G", "image")
    if kind == "image":
        return image_equation(F, _basis(a))
    if kind == "double-locus":
        return _double_locus_equation(F, _basis(a))
    ring = F.target if a.get("side") == "target" else F.source
    return ring(kind)


# --------------------------------------------------------------------------
# operations


@op("fitting", ["presentation of the pushforward on the given basis", "ideal of minors of the required size",
                "optional pullback to the source"],
    ["target multiple point loci as Fitting ideals", "source loci as their pullbacks"])
def _op_fitting(ctx: Context, a: dict) -> Outcome:
    F = ctx.germ(a["germ"])
    P = pushforward_presentation(F, _basis(a))
    I = fitting_ideal(P, int(a["k"]))
    vals = {"ideal": I}
    if a.get("pullback"):
        vals["pullback"] = F.pullback_ideal(I)
    return Outcome(vals, {"presentation_shape": list(P.matrix.shape)})


@op("presentation-check", ["pull back each column of a supplied matrix and pair it with the basis",
                          "compare its Fitting ideals with those of the computed presentation"],
    ["supplied presentation matrices are checked, not trusted"])
def _op_presentation_check(ctx: Context, a: dict) -> Outcome:
    F = ctx.germ(a["germ"])
    R = F.target
    M = PolyMatrix(R, [[R(x) for x in row] for row in a["matrix"]])
    gens = [F.source(b) for b in _basis(a)]
    cols = []
    for j in range(M.ncols):
        s = F.source.zero()
        for i in range(M.nrows):
            s = s + F.pullback(M.rows[i][j]) * gens[i]
        cols.append(s.is_zero())
    ours = pushforward_presentation(F, _basis(a))
    agree = {k: fitting_ideal(PresentedModule(M), k) == fitting_ideal(ours, k) for k in range(M.nrows)}
    return Outcome({"columns_are_relations": cols, "fitting_agrees": agree})


@op("image-equation", ["presentation of the pushforward", "determinant (Fitt_0 generator)"],
    ["image equation as the zeroth Fitting ideal"])
def _op_image_equation(ctx: Context, a: dict) -> Outcome:
    F = ctx.germ(a["germ"])
    G = image_equation(F, _basis(a))
    return Outcome({"equation": G, "terms": len(G.terms), "degree": G.weighted_degree(F.target.weights)})


@op("delta", ["series branches truncated at order N", "codimension of the pulled back algebra",
              "grow N until the conductor is reached", "Milnor number 2 delta - r + 1"],
    ["delta invariant from parametrisations", "Milnor's formula for curves"])
def _op_delta(ctx: Context, a: dict) -> Outcome:
    B = ctx.branches(a["branches"])
    certs = {}
    if "on" in a:
        I = ctx.ideal(a["on"])
        certs["branches_on_curve"] = B.check_vanishing(I.groebner_basis(), max(8, 2 * len(I.ring.variables)))
        if not certs["branches_on_curve"]:
            raise MpspaceError("a branch does not lie on the curve")
    d = delta_invariant(B, cap_N=ctx.cap_N)
    certs["truncation_N"] = d.N
    return Outcome({"delta": d.delta, "r": B.r, "mu": milnor_from_delta(d.delta, B.r),
                    "conductor": d.conductor}, certs)


@op("vd-infinity", ["h = generator of the pulled back double locus ideal", "syzygies of the partials of h",
                    "lift to the normalisation of the triple curve", "colength of the lifted module",
                    "subtract 3 delta"],
    ["virtual number of umbrella points on the double surface"])
def _op_vd(ctx: Context, a: dict) -> Outcome:
    F = ctx.germ(a["germ"])
    P = pushforward_presentation(F, _basis(a))
    h = _double_locus_equation(F, _basis(a))
    sigma = F.pullback_ideal(fitting_ideal(P, 2))
    B = ctx.branches(a["branches"])
    delta = a.get("delta")
    vd, col, d = vd_infinity(h, sigma, B, int(delta) if delta is not None else None, ctx.cap_N)
    return Outcome({"vd": vd, "colength": col, "delta": d}, {"branches_on_curve": True})


@op("euler-chain", ["chi of the triple curve fibre = 1 - mu", "double cover: 2 chi - branch points",
                    "h_1 = 1 - chi", "Lefschetz number of (2,3) gives the alternating part",
                    "rho part = h_1 - alternating - trivial"],
    ["branched double cover Euler characteristic", "Lefschetz fixed point count"])
def _op_euler_chain(ctx: Context, a: dict) -> Outcome:
    mu = int(a["mu"])
    bp = int(a["branch_points"])
    hT = int(a.get("h1_trivial", 0))
    chi_base = 1 - mu
    chi = branched_cover_euler(chi_base, bp)
    h1 = 1 - chi
    alt = lefschetz_solve(bp, hT)
    return Outcome({"chi_base": chi_base, "chi": chi, "h1": h1, "h1_alt": alt, "h1_rho": h1 - alt - hT})


@op("branched-cover-euler", ["2 chi(base) - chi(branch locus)"], ["branched double cover Euler characteristic"])
def _op_bce(ctx: Context, a: dict) -> Outcome:
    return Outcome({"chi": branched_cover_euler(int(a["chi_base"]), int(a["branch_term"]))})


def _milnor_outcome(r, flags) -> Outcome:
    vals = r.to_json()
    vals["count"] = r.value
    certs = {"cm": r.cm_certified, "method": r.method}
    return Outcome(vals, certs, flags)


@op("siersma", ["G = chosen equation of the family", "J = partials of G in the free variables",
                "saturate J by G", "intersection number with the zero parameter fibre",
                "colength when Cohen-Macaulay, else alternating sum of Koszul Tor"],
    ["critical points leaving the zero level", "Serre's intersection formula"])
def _op_siersma(ctx: Context, a: dict) -> Outcome:
    F = ctx.germ(a["germ"])
    G = _equation(F, a)
    params = a.get("params", list(F.unfolding))
    r = siersma_count(G, a["variables"], params, a.get("method", "serre"), ctx.cap_N)
    return _milnor_outcome(r, ["siersma-wedge"])


@op("mu-image", ["G = image equation of the unfolding", "J^rel = partials in the target variables",
                 "saturation J^rel : G^infinity", "Cohen-Macaulay certificate over the parameters",
                 "intersection number with the zero parameter fibre"],
    ["image Milnor number by the relative critical locus"])
def _op_mu_image(ctx: Context, a: dict) -> Outcome:
    F = ctx.germ(a["germ"])
    r = mu_image(F, _basis(a), a.get("method", "auto"), ctx.cap_N)
    return _milnor_outcome(r, ["siersma-wedge"])


@op("relative-critical", ["G = chosen equation", "partials in the listed variables",
                          "saturation by G with its stabilising exponent"],
    ["relative jacobian saturation"])
def _op_relcrit(ctx: Context, a: dict) -> Outcome:
    F = ctx.germ(a["germ"])
    G = _equation(F, a)
    Q, k = relative_critical_ideal(G, a["variables"], exponent=True)
    return Outcome({"ideal": Q, "exponent": k})


@op("ledger", ["collect rank constraints with provenance", "drop rows whose assumption is switched off",
               "exact rational solve", "rank check and rank after dropping each row"],
    ["homology ranks from linear relations between isotypal pieces"])
def _op_ledger(ctx: Context, a: dict) -> Outcome:
    L = ConstraintLedger()
    used = []
    for u in a.get("unknowns", []):
        L.unknown(u)
    for row in a.get("rows", []):
        req = row.get("requires")
        if req:
            if not ctx.flag(req):
                continue
            used.append(req)
        L.add(row["coeffs"], to_rational(row["rhs"]), row.get("provenance", ""))
    for seq in a.get("exact_sequences", []):
        req = seq.get("requires")
        if req:
            if not ctx.flag(req):
                continue
            used.append(req)
        ranks = L.add_exact_sequence(seq["terms"], seq.get("provenance", ""))
        for fx in seq.get("fix_ranks", []):
            L.fix(ranks[int(fx["map"])], fx["value"], fx.get("provenance", ""))
    sol = ledger_solve(L)
    vals = {"values": {k: v for k, v in sol.values.items() if not k.startswith("rank[")},
            "rank": sol.rank, "unique": sol.unique,
            "bounds": {k: list(v) for k, v in sol.bounds.items() if not k.startswith("rank[")}}
    if a.get("drop_check"):
        vals["rank_without_row"] = [L.without(i).rank() for i in range(len(L.constraints))]
    return Outcome(vals, {"nonnegative_integral": True}, sorted(set(used)))


@op("reidemeister", ["rational points of D^k per branch combination", "alternating H_0 bases (signed orbits)",
                     "matrices of the unsigned projections", "turn pages to E^infinity"],
    ["image computing spectral sequence in degree zero"])
def _op_reidemeister(ctx: Context, a: dict) -> Outcome:
    germs = []
    for b in a["branches"]:
        v, c0, c1 = b
        germs.append(MapGerm.build([v, "t"], ["X", "Y", "t"], [c0, c1, "t"], params=["t"]))
    g = MultiGerm(germs)
    runs = {}
    certs = {}
    for t in a["t"]:
        levels = {}
        complete = True
        for k in range(2, int(a.get("kmax", 3)) + 1):
            pts = multigerm_dk_points(g, k, {"t": t})
            complete = complete and pts.complete
            levels[k] = pts.points
        c = AltChainComplex0(levels, list(range(len(germs))))
        d = alt0_differentials(c)
        page = alt0_page(c)
        res = turn_pages(page)
        runs[str(t)] = {"pi": {str(k): UpToSigns([list(r) for r in m]) for k, m in d.items()},
                        "e1": {f"{p},{q}": n for (p, q), n in sorted(page.cells.items())},
                        "homology": res.homology}
        certs[f"points_complete[t={t}]"] = complete
    vals = {"runs": runs}
    if len(runs) > 1:
        mats = [r["pi"].get("2") for r in runs.values()]
        vals["pi2_agree"] = all(m is not None and m.rows == mats[0].rows for m in mats)
    return Outcome(vals, certs)


def _slot_blocks(I: Ideal, F: MapGerm, k: int) -> list:
    y = F.distinguished
    names = [f"{y}{i}" for i in range(1, k + 1)]
    if not all(n in I.ring.variables for n in names):
        names = [f"{y}_{i}" for i in range(1, k + 1)]
    return [(n,) for n in names]


def _symmetric(I: Ideal, blocks) -> bool:
    from .invariants import slot_action
    from itertools import permutations
    for perm in permutations(range(len(blocks))):
        m = slot_action(I.ring, blocks, perm)
        if not all(I.contains(g.substitute(m, I.ring)) for g in I.gens):
            return False
    return True


def _dk(ctx: Context, a: dict) -> tuple[MapGerm, Ideal, int]:
    F = ctx.germ(a["germ"])
    k = int(a["k"])
    I = corank1_dk_ideal(F, k)
    if a.get("add"):
        I = I + Ideal(I.ring, [I.ring(s) for s in a["add"]])
    return F, I, k


@op("dk-ideal", ["divided differences of the components in the distinguished variable",
                 "optional extra equations", "slot symmetry check and colength"],
    ["multiple point spaces of corank one germs"])
def _op_dk(ctx: Context, a: dict) -> Outcome:
    F, I, k = _dk(ctx, a)
    vals = {"ideal": I, "generators": len(I.gens), "symmetric": _symmetric(I, _slot_blocks(I, F, k))}
    try:
        vals["colength"] = colength(I)
    except NotZeroDimensional:
        vals["colength"] = None
    if a.get("contains"):
        vals["contains"] = all(I.contains(I.ring(s)) for s in a["contains"])
    return Outcome(vals)


@op("isotypes", ["D^k ideal", "characters of S_k on the standard monomial basis", "isotypic dimensions"],
    ["isotypal decomposition of a finite multiple point set"])
def _op_isotypes(ctx: Context, a: dict) -> Outcome:
    F, I, k = _dk(ctx, a)
    iv = isotype_dims(I, _slot_blocks(I, F, k))
    vals = {"dims": iv.dims, "total": iv.total()}
    certs = {}
    if a.get("points"):
        pts = rational_points(I)
        vals["points"] = len(pts.points)
        certs["points_complete"] = pts.complete
    return Outcome(vals, certs)


@op("umbrella-count", ["D^2 ideal plus the diagonal y1 = y2", "its colength (fixed points of (1,2))",
                       "colength of the ramification ideal"],
    ["umbrella points are the fixed points of the double point involution"])
def _op_umbrella(ctx: Context, a: dict) -> Outcome:
    F = ctx.germ(a["germ"])
    I = corank1_dk_ideal(F, 2)
    (y1,), (y2,) = _slot_blocks(I, F, 2)
    fixed = colength(I + Ideal(I.ring, [I.ring.var(y1) - I.ring.var(y2)]))
    ram = colength(ramification_ideal(F))
    return Outcome({"fixed_points": fixed, "ramification_colength": ram, "consistent": fixed == ram})


@op("t1", ["source multiple locus ideal", "normal module Hom(I/I^2, R/I)",
           "quotient by the ambient vector fields", "local length"],
    ["first order deformations of the triple locus"])
def _op_t1(ctx: Context, a: dict) -> Outcome:
    F = ctx.germ(a["germ"])
    k = int(a.get("k", 3))
    I = F.pullback_ideal(fitting_ideal(pushforward_presentation(F, _basis(a)), k - 1))
    return Outcome({"dim": t1_dimension(I, ctx.cap_N), "ideal": I})


@op("sigma11", ["ramification ideal", "maximal minors of the jacobian stacked with the jacobian of "
                "the ramification generators", "same zero set as the supplied candidate"],
    ["second order Thom-Boardman locus"])
def _op_sigma11(ctx: Context, a: dict) -> Outcome:
    F = ctx.germ(a["germ"])
    S = sigma11_ideal(F)
    cand = Ideal(F.source, [F.source(s) for s in a["candidate"]])
    return Outcome({"ideal": ZeroSet(S), "same_zero_set": same_zero_set(S, cand)})


@op("shadow", ["image of the ramification locus", "pull back and saturate by the ramification ideal",
               "same zero set as the maximal minors of the supplied matrix"],
    ["shadow component of the preimage of the singular image"])
def _op_shadow(ctx: Context, a: dict) -> Outcome:
    F = ctx.germ(a["germ"])
    r = shadow_ideal(F)
    R = F.source
    M = PolyMatrix(R, [[R(x) for x in row] for row in a["matrix"]])
    minors = Ideal(R, minor_list(M, min(M.nrows, M.ncols)))
    return Outcome({"ideal": ZeroSet(r.ideal), "same_zero_set": same_zero_set(r.ideal, minors)})


@op("colength", ["Groebner basis", "standard monomials (global) or Nakayama stabilisation (local)"],
    ["lengths of zero-dimensional quotients"])
def _op_colength(ctx: Context, a: dict) -> Outcome:
    I = ctx.ideal(a["ideal"])
    if a.get("local"):
        return Outcome({"colength": local_colength(I, ctx.cap_N)})
    return Outcome({"colength": colength(I)})


# --------------------------------------------------------------------------
# runner


def parse_scenario(text: str, source: str = "<scenario>") -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from None
    if not isinstance(data, dict):
        raise ScenarioError(f"{source}: a scenario is a JSON object")
    ids = set()
    for t in data.get("tasks", []):
        if "id" not in t or "op" not in t:
            raise ScenarioError(f"{source}: every task needs an id and an op")
        if t["id"] in ids:
            raise ScenarioError(f"{source}: duplicate task id {t['id']!r}")
        if t["op"] not in OPS:
            raise ScenarioError(f"{source}: unknown op {t['op']!r} in task {t['id']!r}")
        if "expected" in t and not t.get("provenance"):
            raise ScenarioError(f"{source}: task {t['id']!r} has expected values without provenance")
        ids.add(t["id"])
    return data


def load_scenario(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read(), str(path))


def _refs(obj) -> set:
    if isinstance(obj, str) and obj.startswith("@"):
        return {obj[1:].split(".")[0]}
    if isinstance(obj, dict):
        return set().union(*[_refs(v) for v in obj.values()]) if obj else set()
    if isinstance(obj, list):
        return set().union(*[_refs(v) for v in obj]) if obj else set()
    return set()


def _resolve(obj, results: dict):
    if isinstance(obj, str) and obj.startswith("@"):
        parts = obj[1:].split(".")
        v = results[parts[0]]
        for p in parts[1:]:
            v = v[p]
        return v
    if isinstance(obj, dict):
        return {k: _resolve(v, results) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_resolve(v, results) for v in obj]
    return obj


def task_order(tasks: list) -> list[list[dict]]:
    """Tasks grouped in waves; each wave only depends on earlier waves."""
    ids = {t["id"] for t in tasks}
    deps = {}
    for t in tasks:
        d = (_refs(t.get("args", {})) | set(t.get("after", [])))
        missing = d - ids
        if missing:
            raise ScenarioError(f"task {t['id']!r} refers to unknown task(s) {sorted(missing)}")
        deps[t["id"]] = d
    done: set = set()
    waves = []
    pending = list(tasks)
    while pending:
        wave = [t for t in pending if deps[t["id"]] <= done]
        if not wave:
            raise ScenarioError("cyclic task dependencies")
        waves.append(wave)
        done |= {t["id"] for t in wave}
        pending = [t for t in pending if t["id"] not in done]
    return waves


def _digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()[:16]


def execute_task(task: dict, args: dict, definitions: dict, cap_N: int, modular_filter: bool,
                 assumptions: dict) -> dict:
    """Run one task; returns its report record (timing kept under 'timing')."""
    set_modular_filter(modular_filter)
    ctx = Context(definitions, cap_N, assumptions)
    rec = {"id": task["id"], "op": task["op"],
           "inputs_digest": _digest({"op": task["op"], "args": args, "definitions": definitions}),
           "provenance": task.get("provenance"), "assumptions": list(task.get("assumptions", []))}
    t0 = time.perf_counter()
    try:
        out = OPS[task["op"]].run(ctx, args)
    except Exception as e:  # task failures are reported, not raised
        rec.update(status="error", error=f"{type(e).__name__}: {e}", result=None, certificates={})
        if "expected" in task:
            rec["expected"] = task["expected"]
        rec["timing"] = round(time.perf_counter() - t0, 3)
        return rec
    rec["assumptions"] = sorted(set(rec["assumptions"]) | set(out.assumptions))
    rec["result"] = to_json(out.values)
    rec["certificates"] = to_json(out.certificates)
    if "expected" in task:
        checks = {}
        for key, exp in task["expected"].items():
            try:
                checks[key] = key in out.values and matches(out.values[key], exp)
            except Exception:
                checks[key] = False
        rec["expected"] = task["expected"]
        rec["checks"] = checks
        rec["status"] = "pass" if all(checks.values()) else "fail"
    else:
        rec["status"] = "computed"
    rec["timing"] = round(time.perf_counter() - t0, 3)
    return rec


def run_scenario(data: dict | str, cap_N: int = DEFAULT_CAP_N, jobs: int = 1,
                 modular_filter: bool = False) -> dict:
    """Execute every task in dependency order and assemble the report."""
    if isinstance(data, str):
        data = load_scenario(data)
    tasks = data.get("tasks", [])
    definitions = {k: data.get(k, {}) for k in ("germs", "branches")}
    assumptions = dict(data.get("assumptions", {}))
    records: dict[str, dict] = {}
    results: dict[str, Any] = {}
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for wave in task_order(tasks):
            jobs_in = []
            for t in wave:
                failed = [d for d in _refs(t.get("args", {})) if records[d]["status"] == "error"]
                if failed:
                    records[t["id"]] = {"id": t["id"], "op": t["op"], "status": "error",
                                        "error": f"depends on failed task(s) {sorted(failed)}",
                                        "result": None, "certificates": {}, "timing": 0.0,
                                        "provenance": t.get("provenance"),
                                        "assumptions": list(t.get("assumptions", []))}
                    if "expected" in t:
                        records[t["id"]]["expected"] = t["expected"]
                    continue
                try:
                    args = _resolve(t.get("args", {}), results)
                except (KeyError, TypeError) as e:
                    records[t["id"]] = {"id": t["id"], "op": t["op"], "status": "error",
                                        "error": f"unresolved reference {e}", "result": None,
                                        "certificates": {}, "timing": 0.0,
                                        "provenance": t.get("provenance"),
                                        "assumptions": list(t.get("assumptions", []))}
                    if "expected" in t:
                        records[t["id"]]["expected"] = t["expected"]
                    continue
                jobs_in.append((t, args))
            if pool is not None:
                futs = [pool.submit(execute_task, t, args, definitions, cap_N, modular_filter, assumptions)
                        for t, args in jobs_in]
                recs = [f.result() for f in futs]
            else:
                recs = [execute_task(t, args, definitions, cap_N, modular_filter, assumptions)
                        for t, args in jobs_in]
            for rec in recs:
                records[rec["id"]] = rec
                results[rec["id"]] = rec.get("result")
    finally:
        if pool is not None:
            pool.shutdown()
    ordered = [records[t["id"]] for t in tasks]
    flags_used = sorted({f for r in ordered for f in r.get("assumptions", [])})
    summary = {s: sum(1 for r in ordered if r["status"] == s) for s in ("pass", "fail", "error", "computed")}
    return {
        "scenario": data.get("name", ""),
        "version": __version__,
        "settings": {"cap_N": cap_N, "modular_filter": modular_filter},
        "assumptions": {f: {"enabled": bool(assumptions.get(f, True)), "statement": ASSUMPTIONS.get(f, "")}
                        for f in flags_used},
        "tasks": ordered,
        "summary": summary,
    }


def report_failed(report: dict) -> bool:
    """True when some task with expected values did not pass."""
    return any(r["status"] in ("fail", "error") and "expected" in r for r in report["tasks"])


def strip_timing(report: dict) -> dict:
    out = dict(report)
    out["tasks"] = [{k: v for k, v in r.items() if k != "timing"} for r in report["tasks"]]
    return out


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


def report_text(report: dict) -> str:
    lines = [f"scenario {report['scenario']} (mpspace {report['version']})"]
    for r in report["tasks"]:
        head = f"[{r['status'].upper():8}] {r['id']} ({r['op']}, {r['timing']:.2f}s)"
        lines.append(head)
        if r["status"] == "error":
            lines.append(f"    error: {r['error']}")
            continue
        for k, v in (r["result"] or {}).items():
            text = json.dumps(v)
            if len(text) > 160:
                text = text[:157] + "..."
            lines.append(f"    {k} = {text}")
        if r.get("checks"):
            lines.append("    checks: " + ", ".join(f"{k}={'ok' if v else 'MISMATCH'}"
                                                for k, v in r["checks"].items()))
        if r.get("assumptions"):
            lines.append("    assumptions: " + ", ".join(r["assumptions"]))
    s = report["summary"]
    lines.append(f"summary: {s['pass']} passed, {s['fail']} failed, {s['error']} errors, "
                 f"{s['computed']} computed")
    return "\n".join(lines) + "\n"


def explain(task: str) -> str:
    if task not in OPS:
        raise ScenarioError(f"unknown task {task!r}; known: {', '.join(sorted(OPS))}")
    o = OPS[task]
    lines = [f"{o.name}:"]
    lines += [f"  {i}. {s}" for i, s in enumerate(o.steps, 1)]
    lines.append("  anchors: " + "; ".join(o.anchors))
    return "\n".join(lines) + "\n"
