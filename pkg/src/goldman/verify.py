"""Verification suites: batched property checks with machine-readable reports.

Each suite draws every trial from its own generator, seeded by hashing the
base seed with the surface case, k and trial index, so results do not
depend on evaluation order.  A check records a residual against a
tolerance; ``max_residual`` in the report is the worst ratio
``residual / tolerance``, so a suite passes iff it is below 1.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import flows, su2
from .errors import Inconclusive
from .repvar import (
    DoubleRepPoint,
    RepPoint,
    act_G,
    act_GxG,
    deck_T,
    fingerprint,
    fixed_stratum,
    in_Nx,
    lift_I,
    nx_case_form,
    point_from_json,
    sample_Nx,
    sample_R,
    sample_Rtilde,
    same_orbit,
    same_orbit_double,
    tau_witness,
)
from .su2 import IDENTITY, Su2Element
from .surfaces import (
    CASES,
    SurfaceSpec,
    euler_characteristic,
    relation_residual_R,
    relation_residuals_Rtilde,
)

SUITES = ("su2", "variety", "flows", "theorem")

DEFAULT_TOL = {"su2": 1e-12, "variety": 1e-9, "flows": 1e-9, "theorem": 1e-9}
DEFAULT_TRIALS = {"su2": 1000, "variety": 500, "flows": 200, "theorem": 100}
FD_TOL = 1e-6
FD_STEP = 1e-5
FLOW_LAW_TOL = 1e-10
PROP_TOL = 1e-12
WITNESS_TOL = 1e-8
RTILDE_TRIALS = 200
NX_TRIALS = 100
FAILED = 1.0  # residual recorded when a boolean check fails

TORUS_X = su2.diag_element(math.pi / 5)
NX_POINTS = (("1", IDENTITY), ("-1", -IDENTITY), ("torus", TORUS_X))
FLOW_TIMES = (0.37, math.pi / 2, math.pi, 2 * math.pi, -5.1)
PERTURBATION = 1e-3


def env_tolerance():
    value = os.environ.get("GOLDMAN_TOL")
    return float(value) if value else None


def trial_seed(base_seed, spec, trial):
    """64-bit seed derived from (base seed, case, k, trial index)."""
    case = CASES.index(spec.case) if spec is not None else len(CASES)
    k = spec.k if spec is not None else 0
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(case, k, int(trial)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def trial_rng(base_seed, spec, trial):
    seed = trial_seed(base_seed, spec, trial)
    return seed, np.random.default_rng(seed)


def perturb(g, size=PERTURBATION):
    """Move ``g`` off by about ``size`` in a fixed direction orthogonal to it."""
    coords = g.coords
    direction = np.array([0.0, 1.0, 0.0, 0.0])
    direction = direction - (direction @ coords) * coords
    if np.linalg.norm(direction) < 0.5:
        direction = np.array([0.0, 0.0, 1.0, 0.0]) - coords[2] * coords
    direction /= np.linalg.norm(direction)
    return Su2Element.normalized(coords + size * direction)


@dataclass
class CheckLog:
    """Accumulates residuals for one spec (or the spec-free su2 suite)."""

    spec: SurfaceSpec | None
    identities: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    skipped: dict = field(default_factory=dict)

    def record(self, identity, residual, tol, trial, seed):
        residual = float(residual)
        entry = self.identities.setdefault(identity, {"max_residual": 0.0, "tol": tol, "checks": 0})
        entry["checks"] += 1
        if math.isnan(residual) or residual > entry["max_residual"]:
            entry["max_residual"] = residual
        if not residual < tol:
            self.failures.append(
                {
                    "spec": None if self.spec is None else self.spec.to_json(),
                    "trial": trial,
                    "seed": seed,
                    "identity": identity,
                    "residual": residual,
                }
            )

    def skip(self, reason):
        self.skipped[reason] = self.skipped.get(reason, 0) + 1


@dataclass
class VerificationReport:
    suite: str
    specs: list
    trials: int
    seed: int
    tolerance: float
    max_residual: float
    identities: dict
    failures: list
    skipped: dict
    wall_time: float
    subreports: list = field(default_factory=list)

    @property
    def passed(self):
        if self.subreports:
            return all(r.passed for r in self.subreports)
        return not self.failures

    def to_json(self):
        out = {
            "suite": self.suite,
            "passed": self.passed,
            "specs": self.specs,
            "trials": self.trials,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "identities": self.identities,
            "failures": self.failures,
            "skipped": self.skipped,
            "wall_time": self.wall_time,
        }
        if self.subreports:
            out["subreports"] = [r.to_json() for r in self.subreports]
        return out


def _merge(suite, logs, specs, trials, seed, tol, wall):
    identities = {}
    failures, skipped = [], {}
    worst = 0.0
    for log in logs:
        for name, entry in log.identities.items():
            agg = identities.setdefault(name, {"max_residual": 0.0, "tol": entry["tol"], "checks": 0})
            agg["checks"] += entry["checks"]
            agg["max_residual"] = max(agg["max_residual"], entry["max_residual"])
            ratio = entry["max_residual"] / entry["tol"] if entry["tol"] > 0 else math.inf
            worst = max(worst, ratio)
        failures.extend(log.failures)
        for reason, n in log.skipped.items():
            skipped[reason] = skipped.get(reason, 0) + n
    return VerificationReport(
        suite=suite,
        specs=[s.to_json() for s in specs],
        trials=trials,
        seed=seed,
        tolerance=tol,
        max_residual=worst,
        identities=dict(sorted(identities.items())),
        failures=failures,
        skipped=skipped,
        wall_time=wall,
    )


# --- su2 -------------------------------------------------------------------

def _su2_checks(log, g, rng, trial, seed, tol):
    x = su2.random_su2(rng)
    if abs(g.trace()) >= 2.0 - 1e-6:
        log.skip("near_central_sample")
        return
    log.record("exp_log_round_trip", su2.exp_lie(su2.log_ell(g)).distance(g), tol, trial, seed)
    a, b, c = su2.variation_forms(g)
    spread = max(np.linalg.norm(a.coords - b.coords), np.linalg.norm(a.coords - c.coords))
    log.record("variation_three_forms_agree", spread, tol, trial, seed)
    F = su2.variation_F(g)
    log.record("variation_unit_norm", abs(su2.inner_product(F, F) - 1.0), tol, trial, seed)
    log.record("log_norm_is_angle", abs(su2.log_ell(g).norm() - su2.f_angle(g)), tol, trial, seed)
    t = float(rng.uniform(-10.0, 10.0))
    z = su2.zeta(g, t)
    log.record("zeta_commutes_with_g", (z * g).distance(g * z), tol, trial, seed)
    log.record(
        "variation_equivariance",
        np.linalg.norm(su2.variation_F(g.conj_by(x)).coords - su2.adjoint(x, F).coords),
        tol,
        trial,
        seed,
    )
    log.record("f_conjugation_invariant", abs(su2.f_angle(g.conj_by(x)) - su2.f_angle(g)), tol, trial, seed)
    r = su2.principal_sqrt(g)
    log.record("principal_sqrt_squares", (r * r).distance(g), tol, trial, seed)
    # directional derivative of f along a unit direction, central difference
    xi = su2.LieVector(*rng.standard_normal(3))
    xi = xi.scaled(1.0 / xi.norm())
    f_plus = su2.f_angle(g * su2.exp_lie(xi.scaled(FD_STEP)))
    f_minus = su2.f_angle(g * su2.exp_lie(xi.scaled(-FD_STEP)))
    fd = (f_plus - f_minus) / (2 * FD_STEP)
    log.record("variation_finite_difference", abs(fd - F.inner(xi)), FD_TOL, trial, seed)


def negative_fixture_su2():
    g = su2.random_su2(np.random.default_rng(0))
    ell = su2.log_ell(g)
    return {"g": g.to_json(), "log": [v + PERTURBATION for v in ell]}


def _su2_fixture_checks(log, fixture, tol, trial):
    g = Su2Element.from_json(fixture["g"])
    ell = su2.LieVector.from_json(fixture["log"])
    log.record("exp_log_round_trip", su2.exp_lie(ell).distance(g), tol, trial, None)


def run_su2(trials, seed, tol, fixtures=()):
    log = CheckLog(None)
    if trials == 0 and not fixtures:
        return [log]
    # basis self-test: -tr(xy)/2 equals the coordinate dot product
    basis = [su2.LieVector(*e) for e in np.eye(3)]
    gram = np.array([[su2.inner_product(u, v) for v in basis] for u in basis])
    log.record("lie_basis_orthonormal", float(np.max(np.abs(gram - np.eye(3)))), tol, None, seed)
    for trial in range(trials):
        s, rng = trial_rng(seed, None, trial)
        _su2_checks(log, su2.random_su2(rng), rng, trial, s, tol)
    for i, fx in enumerate(fixtures):
        _su2_fixture_checks(log, fx, tol, f"fixture{i}")
    return [log]


# --- variety ---------------------------------------------------------------

def _variety_R_trial(log, spec, rng, trial, seed, tol):
    p = sample_R(spec, rng)
    g = su2.random_su2(rng)
    res = relation_residual_R(spec, p)
    log.record("relation_residual_R", res, tol, trial, seed)
    gp = act_G(g, p)
    log.record("R_action_preserves_residual", abs(relation_residual_R(spec, gp) - res), tol, trial, seed)
    log.record("R_fingerprint_invariant", fingerprint(gp, spec).distance(fingerprint(p, spec)), tol, trial, seed)
    w = same_orbit(p, gp, spec)
    log.record("same_orbit_planted_witness", FAILED if w is None else act_G(w, p).distance(gp), WITNESS_TOL, trial, seed)
    q = lift_I(p, spec)
    log.record("lift_I_in_Rtilde", max(relation_residuals_Rtilde(spec, q)), tol, trial, seed)
    log.record("lift_I_equivariance", lift_I(gp, spec).distance(act_GxG(g, g, q, spec)), tol, trial, seed)


def _variety_Rtilde_trial(log, spec, rng, trial, seed, tol):
    q = sample_Rtilde(spec, rng)
    g, h = su2.random_su2(rng), su2.random_su2(rng)
    res = max(relation_residuals_Rtilde(spec, q))
    log.record("relation_residuals_Rtilde", res, tol, trial, seed)
    gq = act_GxG(g, h, q, spec)
    log.record("Rtilde_action_preserves_residuals", max(relation_residuals_Rtilde(spec, gq)), tol, trial, seed)
    log.record("Rtilde_fingerprint_invariant", fingerprint(gq, spec).distance(fingerprint(q, spec)), tol, trial, seed)
    w = same_orbit_double(q, gq, spec)
    log.record(
        "same_orbit_double_planted_witness",
        FAILED if w is None else act_GxG(w[0], w[1], q, spec).distance(gq),
        WITNESS_TOL,
        trial,
        seed,
    )
    tq = deck_T(q)
    log.record("deck_T_involution", deck_T(tq).distance(q), tol, trial, seed)
    log.record("deck_T_in_Rtilde", max(relation_residuals_Rtilde(spec, tq)), tol, trial, seed)
    log.record("deck_T_swaps_action", deck_T(gq).distance(act_GxG(h, g, tq, spec)), tol, trial, seed)
    if trial < NX_TRIALS:
        for label, x in NX_POINTS:
            qx = sample_Nx(spec, x, rng)
            ok, r = in_Nx(qx, x, spec)
            log.record(f"Nx_criterion[{label}]", r, tol, trial, seed)
            # the explicit case form rebuilt from the unbarred half must agree
            rebuilt = nx_case_form(qx.unbarred, x, spec)
            log.record(f"Nx_case_form[{label}]", rebuilt.distance(qx), tol, trial, seed)
            log.record(f"Nx_class_tau_fixed[{label}]", _tau_residual(qx, spec), WITNESS_TOL, trial, seed)


def _tau_residual(q, spec):
    try:
        w = tau_witness(q, spec)
    except Inconclusive:
        return FAILED
    if w is None:
        return FAILED
    return act_GxG(w[0], w[1], q, spec).distance(deck_T(q))


def _point_record_checks(log, spec, record, tol, trial):
    point = point_from_json(record["point"], normalize=True)
    if isinstance(point, DoubleRepPoint):
        log.record("relation_residuals_Rtilde", max(relation_residuals_Rtilde(spec, point)), tol, trial, None)
    else:
        log.record("relation_residual_R", relation_residual_R(spec, point), tol, trial, None)


def negative_fixture_variety(spec):
    p = sample_R(spec, np.random.default_rng(0))
    bad = RepPoint(p.c, perturb(p.b), p.a)
    return {"spec": spec.to_json(), "variety": "R", "point": bad.to_json()}


def run_variety_spec(spec, trials, seed, tol, fixtures=()):
    log = CheckLog(spec)
    if trials == 0 and not fixtures:
        return log
    log.record(
        "generator_count_is_2_minus_chi",
        abs(spec.generator_count - (2 - euler_characteristic(spec))),
        0.5,
        None,
        seed,
    )
    for trial in range(trials):
        s, rng = trial_rng(seed, spec, trial)
        _variety_R_trial(log, spec, rng, trial, s, tol)
        if trial < RTILDE_TRIALS:
            _variety_Rtilde_trial(log, spec, rng, trial, s, tol)
    for i, fx in enumerate(fixtures):
        _point_record_checks(log, spec, fx, tol, f"fixture{i}")
    return log


# --- flows -----------------------------------------------------------------

def _flow_trial(log, spec, rng, trial, seed, tol):
    p = sample_R(spec, rng)
    q = sample_Rtilde(spec, rng)
    g, h = su2.random_su2(rng), su2.random_su2(rng)
    _flow_point_checks(log, spec, p, q, g, h, trial, seed, tol)


def _flow_point_checks(log, spec, p, q, g, h, trial, seed, tol):
    # p is None for a double-cover fixture, which has no point of R to flow
    res_p = relation_residual_R(spec, p) if p is not None else 0.0
    res_q = max(relation_residuals_Rtilde(spec, q))
    if p is not None:
        log.record("flow_input_in_R", res_p, tol, trial, seed)
    log.record("flow_input_in_Rtilde", res_q, tol, trial, seed)
    grid = flows.T_GRID
    for i, t in enumerate(grid):
        s = grid[(i + 1) % len(grid)]
        for name in ("phi", "psi", "composite"):
            fq = flows.FLOWS[name](q, t)
            r = max(relation_residuals_Rtilde(spec, fq))
            log.record(f"{name}_preserves_Rtilde", abs(r - res_q), tol, trial, seed)
            log.record(f"{name}_output_in_Rtilde", r, tol, trial, seed)
            conserved = fq.c == q.c and fq.cbar == q.cbar
            log.record(f"{name}_conserves_c_cbar", 0.0 if conserved else FAILED, tol, trial, seed)
            law = flows.FLOWS[name](flows.FLOWS[name](q, s), t).distance(flows.FLOWS[name](q, t + s))
            log.record(f"{name}_flow_law", law, FLOW_LAW_TOL, trial, seed)
            equi = flows.FLOWS[name](act_GxG(g, h, q, spec), t).distance(act_GxG(g, h, fq, spec))
            log.record(f"{name}_equivariance", equi, tol, trial, seed)
        if p is not None:
            xp = flows.flow_Xi(p, t)
            log.record("xi_preserves_R", abs(relation_residual_R(spec, xp) - res_p), tol, trial, seed)
            log.record("xi_conserves_c", 0.0 if xp.c == p.c else FAILED, tol, trial, seed)
            law = flows.flow_Xi(flows.flow_Xi(p, s), t).distance(flows.flow_Xi(p, t + s))
            log.record("xi_flow_law", law, FLOW_LAW_TOL, trial, seed)
            xi_equi = flows.flow_Xi(act_G(g, p), t).distance(act_G(g, xp))
            log.record("xi_equivariance", xi_equi, tol, trial, seed)
        split = flows.composite_flow(q, t).distance(flows.flow_Phi(flows.flow_Psi(q, -t), t))
        log.record("composite_is_phi_after_psi_reversed", split, tol, trial, seed)
        commute = flows.flow_Psi(flows.flow_Phi(q, t), s).distance(flows.flow_Phi(flows.flow_Psi(q, s), t))
        log.record("phi_psi_commute", commute, tol, trial, seed)
    two_pi = flows.TWO_PI
    if p is not None:
        log.record("xi_2pi_periodic", flows.flow_Xi(p, two_pi).distance(p), tol, trial, seed)
    for name in ("phi", "psi", "composite"):
        log.record(f"{name}_2pi_periodic", flows.FLOWS[name](q, two_pi).distance(q), tol, trial, seed)


def negative_fixture_flows(spec):
    q = sample_Rtilde(spec, np.random.default_rng(0))
    bad = DoubleRepPoint(q.c, perturb(q.b), q.a, q.cbar, q.bbar, q.abar)
    return {"spec": spec.to_json(), "variety": "Rtilde", "point": bad.to_json()}


def run_flows_spec(spec, trials, seed, tol, fixtures=()):
    log = CheckLog(spec)
    for trial in range(trials):
        s, rng = trial_rng(seed, spec, trial)
        _flow_trial(log, spec, rng, trial, s, tol)
    for i, fx in enumerate(fixtures):
        point = point_from_json(fx["point"], normalize=True)
        rng = np.random.default_rng(i)
        if isinstance(point, DoubleRepPoint):
            p, q = None, point
        else:
            p, q = point, lift_I_unchecked(point)
        _flow_point_checks(log, spec, p, q, su2.random_su2(rng), su2.random_su2(rng), f"fixture{i}", None, tol)
    return log


def lift_I_unchecked(p):
    return DoubleRepPoint(p.c, p.b, p.a, p.c, p.b, p.a)


# --- theorem ---------------------------------------------------------------

def _flowable(q):
    return not (su2.is_central(q.c) or su2.is_central(q.cbar))


def _theorem_trial(log, spec, rng, trial, seed, tol):
    p = sample_R(spec, rng)
    q = sample_Rtilde(spec, rng)
    lp = lift_I(p, spec)
    for t in flows.T_GRID:
        prop1 = flows.composite_flow(deck_T(q), t).distance(deck_T(flows.composite_flow(q, t)))
        log.record("composite_commutes_with_T", prop1, PROP_TOL, trial, seed)
        prop2 = flows.composite_flow(lp, t).distance(lift_I_unchecked(flows.flow_Xi(p, t)))
        log.record("composite_after_I_is_I_after_xi", prop2, PROP_TOL, trial, seed)
    for label, x in NX_POINTS:
        qx = sample_Nx(spec, x, rng)
        _nx_flow_checks(log, spec, qx, x, label, rng, trial, seed, tol)
    # a generic point is not deck-fixed, before or after flowing
    for t in FLOW_TIMES[:1]:
        qt = flows.composite_flow(q, t)
        try:
            fixed = tau_witness(qt, spec) is not None
        except Inconclusive:
            fixed = True
        log.record("generic_point_not_tau_fixed", FAILED if fixed else 0.0, tol, trial, seed)


def _nx_flow_checks(log, spec, qx, x, label, rng, trial, seed, tol):
    if not _flowable(qx):
        log.skip(f"composite_on_Nx[{label}]: c or cbar is +-1, outside the flow domain")
        return
    for t in flows.T_GRID:
        _, r = in_Nx(flows.composite_flow(qx, t), x, spec)
        log.record(f"composite_preserves_Nx[{label}]", r, tol, trial, seed)
    # quotient-level statements on a random representative of the class
    g, h = su2.random_su2(rng), su2.random_su2(rng)
    moved = act_GxG(g, h, qx, spec)
    for t in FLOW_TIMES:
        qt = flows.composite_flow(moved, t)
        log.record(f"tau_fixed_preserved[{label}]", _tau_residual(qt, spec), WITNESS_TOL, trial, seed)
        if label in ("1", "-1"):
            target = IDENTITY if label == "1" else -IDENTITY
            try:
                stratum = fixed_stratum(qt, spec)
            except Inconclusive:
                stratum = None
            r = FAILED if stratum is None else stratum.distance(target)
            name = "iota_image_preserved" if label == "1" else "N_minus1_class_preserved"
            log.record(name, r, WITNESS_TOL, trial, seed)


def negative_fixture_theorem(spec):
    q = sample_Nx(spec, -IDENTITY, np.random.default_rng(0))
    abar = (perturb(q.abar[0]),) + q.abar[1:] if q.abar else q.abar
    bbar = q.bbar if q.abar else perturb(q.bbar)
    bad = DoubleRepPoint(q.c, q.b, q.a, q.cbar, bbar, abar)
    return {"spec": spec.to_json(), "variety": "Nx", "x": (-IDENTITY).to_json(), "point": bad.to_json()}


def run_theorem_spec(spec, trials, seed, tol, fixtures=()):
    log = CheckLog(spec)
    for trial in range(trials):
        s, rng = trial_rng(seed, spec, trial)
        _theorem_trial(log, spec, rng, trial, s, tol)
    for i, fx in enumerate(fixtures):
        point = point_from_json(fx["point"], normalize=True)
        if "x" not in fx or not isinstance(point, DoubleRepPoint):
            continue
        x = Su2Element.from_json(fx["x"])
        _, r = in_Nx(point, x, spec)
        log.record("fixture_in_Nx", r, tol, f"fixture{i}", None)
        _nx_flow_checks(log, spec, point, x, "fixture", np.random.default_rng(i), f"fixture{i}", None, tol)
    return log


# --- orchestration ---------------------------------------------------------

_SPEC_RUNNERS = {"variety": run_variety_spec, "flows": run_flows_spec, "theorem": run_theorem_spec}
NEGATIVE_FIXTURES = {
    "variety": negative_fixture_variety,
    "flows": negative_fixture_flows,
    "theorem": negative_fixture_theorem,
}


def _run_one(args):
    suite, spec, trials, seed, tol, fixtures = args
    return _SPEC_RUNNERS[suite](spec, trials, seed, tol, fixtures)


def run_suite(
    suite,
    specs,
    trials=None,
    seed=0,
    tol=None,
    fixtures=(),
    negative_control=False,
    jobs=1,
):
    """Run one suite (or ``"all"``) and return a :class:`VerificationReport`.

    ``fixtures`` are point records (or, for su2, ``{"g", "log"}`` pairs)
    checked alongside the random trials; ``negative_control`` adds the
    suite's built-in corrupted fixture, which must make the suite fail.
    """
    if suite == "all":
        start = time.perf_counter()
        subs = [
            run_suite(s, specs, trials, seed, tol, fixtures, negative_control, jobs) for s in SUITES
        ]
        worst = max(r.max_residual for r in subs)
        report = VerificationReport(
            suite="all",
            specs=[s.to_json() for s in specs],
            trials=trials if trials is not None else -1,
            seed=seed,
            tolerance=tol if tol is not None else -1.0,
            max_residual=worst,
            identities={},
            failures=[f for r in subs for f in r.failures],
            skipped={},
            wall_time=time.perf_counter() - start,
            subreports=subs,
        )
        return report
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    if trials is None:
        trials = DEFAULT_TRIALS[suite]
    if tol is None:
        tol = env_tolerance() or DEFAULT_TOL[suite]
    start = time.perf_counter()
    if suite == "su2":
        fx = list(f for f in fixtures if "g" in f)
        if negative_control:
            fx.append(negative_fixture_su2())
        logs = run_su2(trials, seed, tol, fx)
        return _merge(suite, logs, [], trials, seed, tol, time.perf_counter() - start)

    def fixtures_for(spec, first):
        mine = [f for f in fixtures if "point" in f and SurfaceSpec.from_json(f["spec"], True) == _loose(spec)]
        if negative_control and first:
            mine.append(NEGATIVE_FIXTURES[suite](spec))
        return mine

    jobs_args = [
        (suite, spec, trials, seed, tol, fixtures_for(spec, i == 0)) for i, spec in enumerate(specs)
    ]
    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            logs = list(pool.map(_run_one, jobs_args))
    else:
        logs = [_run_one(a) for a in jobs_args]
    return _merge(suite, logs, specs, trials, seed, tol, time.perf_counter() - start)


def _loose(spec):
    return SurfaceSpec(spec.case, spec.k, allow_k0=True)
