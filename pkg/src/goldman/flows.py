"""Goldman twist flows on the representation varieties.

All flows twist a single generator that crosses the cylinder by the
one-parameter subgroup ``zeta_t(c) = exp(t F(c))`` through the holonomy of
the core curve; every other generator is left alone.

    xi         on R:        b    -> zeta_t(c)^-1 b
    phi        on Rtilde:   b    -> zeta_t(c)^-1 b
    psi        on Rtilde:   bbar -> zeta_t(cbar) bbar
    composite  phi_t o psi_-t
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import su2
from .repvar import DoubleRepPoint, RepPoint, sample_R, sample_Rtilde
from .surfaces import relation_residual_R, relation_residuals_Rtilde


@dataclass(frozen=True)
class EndpointRule:
    """``hol -> zeta_t^left hol zeta_t^right``."""

    left: int = 0
    right: int = 0

    def __post_init__(self):
        if self.left not in (-1, 0, 1) or self.right not in (-1, 0, 1):
            raise ValueError("exponents must be -1, 0 or +1")

    def __str__(self):
        return VALUE_SHAPES.get(self, f"zeta^{self.left} Hol zeta^{self.right}")


# The value shapes a holonomy can take under the twist, by endpoint behaviour.
VALUE_SHAPES = {
    EndpointRule(0, 0): "Hol",
    EndpointRule(1, -1): "zeta Hol zeta^-1",
    EndpointRule(-1, 1): "zeta^-1 Hol zeta",
    EndpointRule(0, 1): "Hol zeta",
    EndpointRule(0, -1): "Hol zeta^-1",
    EndpointRule(1, 0): "zeta Hol",
    EndpointRule(-1, 0): "zeta^-1 Hol",
}

UNCHANGED = EndpointRule(0, 0)
LEFT_INVERSE = EndpointRule(-1, 0)
LEFT = EndpointRule(1, 0)


def _power(z, e):
    if e == 0:
        return su2.IDENTITY
    return z if e > 0 else z.inverse()


def apply_endpoint_rule(rule, hol, c, t, eps=su2.DEFAULT_EPS):
    z = su2.zeta(c, t, eps, name="c")
    return _power(z, rule.left) * hol * _power(z, rule.right)


def flow_Xi(p, t, spec=None, eps=su2.DEFAULT_EPS):
    z = su2.zeta(p.c, t, eps, name="c")
    return RepPoint(p.c, z.inverse() * p.b, p.a)


def flow_Phi(q, t, spec=None, eps=su2.DEFAULT_EPS):
    z = su2.zeta(q.c, t, eps, name="c")
    return DoubleRepPoint(q.c, z.inverse() * q.b, q.a, q.cbar, q.bbar, q.abar)


def flow_Psi(q, t, spec=None, eps=su2.DEFAULT_EPS):
    # left multiplication by zeta_t(cbar) itself, not its inverse
    z = su2.zeta(q.cbar, t, eps, name="cbar")
    return DoubleRepPoint(q.c, q.b, q.a, q.cbar, z * q.bbar, q.abar)


def composite_flow(q, t, spec=None, eps=su2.DEFAULT_EPS):
    z = su2.zeta(q.c, t, eps, name="c")
    zbar = su2.zeta(q.cbar, t, eps, name="cbar")
    return DoubleRepPoint(q.c, z.inverse() * q.b, q.a, q.cbar, zbar.inverse() * q.bbar, q.abar)


FLOWS = {"xi": flow_Xi, "phi": flow_Phi, "psi": flow_Psi, "composite": composite_flow}


# --- endpoint-rule engine --------------------------------------------------

def rule_assignment(flow, spec):
    """Rule per letter name for one flow, plus the letter whose holonomy
    supplies zeta.

    Only the generator crossing the twisted cylinder once moves; every other
    generator avoids the cylinder and keeps rule (0, 0).
    """
    if flow == "xi":
        names = spec.letter_names()
        moving, rule, core = "b", LEFT_INVERSE, "c"
    elif flow == "phi":
        names = spec.double_letter_names()
        moving, rule, core = "b", LEFT_INVERSE, "c"
    elif flow == "psi":
        names = spec.double_letter_names()
        moving, rule, core = "bbar", LEFT, "cbar"
    else:
        raise ValueError(f"no single-cylinder rule table for flow {flow!r}")
    table = {n: UNCHANGED for n in names}
    table[moving] = rule
    return table, core


def apply_rules(point, flow, t, spec, eps=su2.DEFAULT_EPS):
    """Evaluate a flow through its endpoint-rule table."""
    table, core = rule_assignment(flow, spec)
    names = spec.double_letter_names() if isinstance(point, DoubleRepPoint) else spec.letter_names()
    letters = point.letters()
    c = letters[names.index(core)]
    out = [apply_endpoint_rule(table[n], x, c, t, eps) for n, x in zip(names, letters)]
    return type(point).from_letters(out)


@dataclass
class RuleReport:
    spec: object
    trials: int
    max_residual: float
    failures: list

    @property
    def passed(self):
        return not self.failures


def consistency_check_rules(spec, rng, trials=500, tol=1e-9, t_range=10.0):
    """Check the rule tables against the closed-form flow definitions.

    For each random sample and time, the rule-engine output must agree with
    the direct flow and keep every relation residual below ``tol``.
    """
    failures = []
    worst = 0.0
    for trial in range(trials):
        t = float(rng.uniform(-t_range, t_range))
        p = sample_R(spec, rng)
        q = sample_Rtilde(spec, rng)
        checks = {}
        for name, point, direct in (
            ("xi", p, flow_Xi),
            ("phi", q, flow_Phi),
            ("psi", q, flow_Psi),
        ):
            via_rules = apply_rules(point, name, t, spec)
            checks[f"{name}_matches_definition"] = via_rules.distance(direct(point, t))
            if name == "xi":
                checks["xi_relation"] = relation_residual_R(spec, via_rules)
            else:
                checks[f"{name}_relations"] = max(relation_residuals_Rtilde(spec, via_rules))
        for ident, r in checks.items():
            worst = max(worst, r)
            if not r < tol:
                failures.append({"trial": trial, "identity": ident, "residual": r})
    return RuleReport(spec, trials, worst, failures)


def trajectory(point, flow, t_values, spec):
    """Flow a point over a list of times; residuals are the relation residuals."""
    fn = FLOWS[flow]
    points, residuals = [], []
    for t in t_values:
        x = fn(point, float(t), spec)
        points.append(x)
        if isinstance(x, DoubleRepPoint):
            residuals.append(max(relation_residuals_Rtilde(spec, x)))
        else:
            residuals.append(relation_residual_R(spec, x))
    return points, residuals


TWO_PI = 2.0 * math.pi
T_GRID = (0.0, 0.37, math.pi / 2, math.pi, TWO_PI, -5.1)
