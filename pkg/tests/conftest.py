from __future__ import annotations

import sympy
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def to_sympy(p, symbols: dict):
    """Independent conversion through the printed form."""
    return sympy.sympify(str(p).replace("^", "**"), locals=symbols)


def sympy_reduced_gb(polys, variables, order="grevlex"):
    syms = sympy.symbols(variables)
    table = dict(zip(variables, syms))
    exprs = [to_sympy(p, table) for p in polys]
    G = sympy.groebner(exprs, *syms, order=order, domain="QQ")
    return {sympy.expand(g) for g in G.exprs}, table


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
