"""One pass/fail line per acceptance criterion, each at its stated tolerance and time budget.

Published values are written out here; computed values come from the bundled
scenarios run once per session, plus direct library calls where cheap.
"""
from __future__ import annotations

import ast
import re
import subprocess
import sys
import time
from pathlib import Path

import pytest

from mpspace import Ideal, Ring
from mpspace.icss import equal_up_to_signs
from mpspace.scenario import run_scenario

from conftest import ACCEPTANCE_LINES

HERE = Path(__file__).resolve().parent
SCENARIOS = HERE.parent / "src" / "mpspace" / "scenarios"


@pytest.fixture(scope="session")
def reports():
    out = {}
    for name in ("sharland_3to4", "corank2_5to6", "reidemeister", "h2_example"):
        t0 = time.perf_counter()
        rep = run_scenario(str(SCENARIOS / f"{name}.json"))
        rep["wall"] = time.perf_counter() - t0
        out[name] = rep
    return out


def task(rep, tid):
    return next(t for t in rep["tasks"] if t["id"] == tid)


def ideal_of(variables, gens):
    R = Ring(variables)
    return Ideal(R, [R(g) for g in gens])


def record(n, ok, seconds, budget, detail, flags=()):
    status = "PASS" if ok else "FAIL"
    line = (f"criterion {n:>2} {status} exact, {seconds:.2f}s (budget {budget}), "
            f"flags: {', '.join(sorted(set(flags))) or 'none'}; {detail}")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def timing(*recs):
    return sum(r["timing"] for r in recs)


def test_criterion_01_fitting_ideal(reports):
    t = task(reports["sharland_3to4"], "fitt2")
    # [PAPER] image double locus and its pullback
    fitt = ideal_of("X Y U V W", t["result"]["ideal"]) == ideal_of("X Y U V W", ["X^4+U", "V", "X^2*U+W"])
    pull = ideal_of("x y z", t["result"]["pullback"]) == ideal_of("x y z", ["x^4+x^2*y+y^2+x*z", "y*z", "x^3*z+z^2"])
    s = timing(t)
    assert record(1, fitt and pull and s < 60, s, "60s", f"Fitt ideal {fitt}, pullback {pull}")


def test_criterion_02_delta_and_mu(reports):
    t = task(reports["sharland_3to4"], "delta")
    r = t["result"]
    ok = r["delta"] == 5 and r["mu"] == 8 and t["timing"] < 10
    assert record(2, ok, t["timing"], "10s", f"delta {r['delta']}, mu {r['mu']}, branches {r['r']}")


def test_criterion_03_vd_infinity(reports):
    t = task(reports["sharland_3to4"], "vd")
    r = t["result"]
    ok = r["vd"] == 10 and r["colength"] == 25 and r["colength"] - 3 * r["delta"] == r["vd"] and t["timing"] < 60
    assert record(3, ok, t["timing"], "60s", f"colength {r['colength']} - 3*{r['delta']} = {r['vd']}")


def test_criterion_04_euler_chain(reports):
    t = task(reports["sharland_3to4"], "euler")
    r = t["result"]
    ok = (r["chi"], r["h1"], r["h1_alt"], r["h1_rho"]) == (-24, 25, 9, 16)
    detail = (f"chi {r['chi']}, h1 {r['h1']}, alt {r['h1_alt']}, rho {r['h1_rho']} "
              f"(curve mu {1 - r['chi_base']}, trivial part of H1 given as 0)")
    assert record(4, ok, t["timing"], "exact", detail, t["assumptions"])


def test_criterion_05_serre_and_siersma(reports):
    t = task(reports["sharland_3to4"], "siersma")
    r = t["result"]
    ok = r["tor"][:3] == [29, 3, 1] and all(x == 0 for x in r["tor"][3:]) and r["count"] == 27
    ok = ok and t["timing"] < 600
    assert record(5, ok, t["timing"], "600s target, 1800s cap", f"Tor {r['tor']}, count {r['count']}",
                  t["assumptions"])


def test_criterion_06_ledger(reports):
    t = task(reports["sharland_3to4"], "ledger")
    r = t["result"]
    order = ["H2T(D2)", "H2Alt(D2)", "H2(D21)", "H1T(D3)", "H1Alt(D3)", "H1rho(D3)", "H1(D31)", "VDinf"]
    values = tuple(r["values"][k] for k in order)
    # [PAPER] the solved table
    ok = values == (1, 9, 27, 0, 9, 16, 8, 10) and r["rank"] == 8 and r["unique"]
    assert record(6, ok, t["timing"], "instant", f"solution {values}, rank {r['rank']}", t["assumptions"])


def test_criterion_07_image_milnor(reports):
    a = task(reports["sharland_3to4"], "mu")
    b = task(reports["corank2_5to6"], "mu")
    ok = (a["result"]["value"] == 18 and a["result"]["cm_certified"] and a["timing"] < 600
          and b["result"]["value"] == 1 and b["result"]["cm_certified"] and b["timing"] < 600)
    assert record(7, ok, max(a["timing"], b["timing"]), "600s each",
                  f"mu_I {a['result']['value']} and {b['result']['value']}, CM certified "
                  f"{a['result']['cm_certified']} and {b['result']['cm_certified']}",
                  a["assumptions"] + b["assumptions"])


def test_criterion_08_corank2_suite(reports):
    rep = reports["corank2_5to6"]
    fitt = task(rep, "fitt2")
    target = "X Y Z a b c t"
    f_ok = ideal_of(target, fitt["result"]["ideal"]) == ideal_of(target, ["Z+a*c", "Y-b*c", "X+(a+t)*b"])
    rel = task(rep, "relcrit")
    src = "x y a b c t"
    r_ok = ideal_of(src, rel["result"]["ideal"]) == ideal_of(src, ["3*c-t", "3*b+t", "2*a+t", "6*y+t", "6*x-t"])
    s_ok = task(rep, "sigma11")["checks"]["same_zero_set"]
    sh_ok = task(rep, "shadow_f0")["checks"]["same_zero_set"] and task(rep, "shadow_F")["checks"]["same_zero_set"]
    t1 = task(rep, "t1")["result"]["dim"] == 1
    led = task(rep, "ledger")
    v = led["result"]["values"]
    l_ok = (v["H3Alt(D3)"], v["H2rho(D3)"], v["H2(D2)"], v["H1(D2)"]) == (1, 2, 1, 0)
    total = timing(*rep["tasks"])
    ok = all([f_ok, r_ok, s_ok, sh_ok, t1, l_ok]) and total < 600
    assert record(8, ok, total, "600s total",
                  f"Fitt {f_ok}, saturation {r_ok}, sigma11 {s_ok}, shadow {sh_ok}, T1 {t1}, ledger {l_ok}",
                  led["assumptions"])


def test_criterion_09_reidemeister(reports):
    rep = reports["reidemeister"]
    # [PAPER] displayed pi^2 (and pi^3 for the triple point) matrices
    runs = {tid: task(rep, tid)["result"]["runs"] for tid in ("move_I", "move_II", "move_III")}
    shown = {
        "move_I": ("1", {"2": [[0]]}),
        "move_II": ("2", {"2": [[1, 1], [-1, -1]]}),
        "move_III": ("0", {"2": [[1, -1, 0], [-1, 0, 1], [0, 1, -1]], "3": [[1], [1], [1]]}),
    }
    ok = True
    for tid, (t, mats) in shown.items():
        for k, m in mats.items():
            ok = ok and equal_up_to_signs(runs[tid][t]["pi"][k], m)
    generic = [runs["move_I"]["1"], runs["move_II"]["2"], runs["move_III"]["1"]]
    ok = ok and all(g["homology"] == [1, 1] for g in generic)
    agree = task(rep, "move_III")["result"]["pi2_agree"]
    s = timing(*rep["tasks"])
    ok = ok and agree and s < 5
    assert record(9, ok, s, "5s", f"matrices up to sign and H = (1, 1) for t != 0: {ok}; move III agreement {agree}")


def test_criterion_10_h2_example(reports):
    rep = reports["h2_example"]
    d2, d3 = task(rep, "d2"), task(rep, "d3")
    ring = "x y1 y2"
    d2_ok = ideal_of(ring, d2["result"]["ideal"]) == ideal_of(
        ring, ["y1^2+y1*y2+y2^2", "x+y1^4+y1^3*y2+y1^2*y2^2+y1*y2^3+y2^4"])
    d3r = d3["result"]
    d3_ok = d3r["symmetric"] and d3r["contains"] and d3r["generators"] == 4 and d3r["colength"] == 6
    iso = task(rep, "d3_perturbed")["result"]
    iso_ok = iso["dims"] == {"trivial": 1, "sign": 1, "rho": 4} and iso["points"] == 6
    umb = task(rep, "umbrellas")["result"]
    u_ok = umb["consistent"] and umb["fixed_points"] == 2
    s = timing(*rep["tasks"])
    ok = d2_ok and d3_ok and iso_ok and u_ok and s < 60
    assert record(10, ok, s, "60s", f"D2 {d2_ok}, D3 colength {d3r['colength']}, isotypes {iso['dims']}, "
                                    f"fixed points {umb['fixed_points']}")


def property_case_count() -> int:
    tree = ast.parse((HERE / "test_properties.py").read_text())
    total = 0
    for node in ast.walk(tree):
        if isinstance(node, ast.Call) and getattr(node.func, "id", "") == "settings":
            for kw in node.keywords:
                if kw.arg == "max_examples":
                    total += kw.value.value
    return total


def test_criterion_11_property_suites():
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           str(HERE / "test_properties.py")], capture_output=True, text=True, cwd=HERE.parent)
    s = time.perf_counter() - t0
    m = re.search(r"(\d+) passed", proc.stdout)
    passed = int(m.group(1)) if m else 0
    cases = property_case_count()
    ok = proc.returncode == 0 and cases >= 200
    assert record(11, ok, s, "none stated", f"{passed} property tests, {cases} generated cases, exit {proc.returncode}")
