"""Command-line front end: scenario files in, CSV/JSON data out.

Scenario files are small JSON documents (see load_scenario) describing the
system parameters, the four bodies, a time grid, and optional momentum-boost
events.  All emitted numbers use repr() of Python floats, so parsing a file
back reproduces every value bit-for-bit; writes go through a temp file and
os.replace so readers never observe a half-written file.

Exit codes: 0 success, 2 bad input (schema, frame, parse), 3 numerical
divergence, 4 verification failure under --strict.
"""

import argparse
import json
import math
import numbers
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from .core import (
    LimaxError,
    PhaseState,
    SystemParams,
    cm_residual,
    default_tolerance,
    random_cm_state,
)
from . import analytic
from .dynamics import DivergenceError, IntegratorConfig, Trajectory, integrate
from . import integrals as igr
from .scenarios import (
    BoostEvent,
    TrajectoryClass,
    apply_fusion_boosts,
    apply_pair_boost,
    check_choreography_conditions,
    classify,
    fragmentation_scenario,
    fusion_boosts,
)

DEFAULT_SEED = 7

DRIFT_SAMPLES = 257
BRACKET_STATES = 100
BRACKET_H = 1e-4
TOL_GLOBAL_DRIFT = 1e-9
TOL_IGEN_DRIFT = 1e-10
TOL_BRACKET = 1e-8
TOL_PARTICULAR = 1e-10


class ScenarioError(LimaxError):
    """Scenario file problem; `field` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class Scenario:
    params: SystemParams
    state: PhaseState
    dt: float
    t_final: float
    events: tuple
    seed: int
    name: str | None = None


def _require_real(obj, field, minimum=None, strict_min=False):
    if isinstance(obj, bool) or not isinstance(obj, numbers.Real):
        raise ScenarioError("must be a number", field)
    val = float(obj)
    if not math.isfinite(val):
        raise ScenarioError("must be finite", field)
    if minimum is not None:
        if strict_min and val <= minimum:
            raise ScenarioError(f"must be > {minimum}", field)
        if not strict_min and val < minimum:
            raise ScenarioError(f"must be >= {minimum}", field)
    return val


def _require_vec2(obj, field):
    if not isinstance(obj, list) or len(obj) != 2:
        raise ScenarioError("must be a list of two numbers", field)
    return [_require_real(obj[k], f"{field}[{k}]") for k in range(2)]


def _require_int(obj, field, minimum=None):
    if isinstance(obj, bool) or not isinstance(obj, numbers.Integral):
        raise ScenarioError("must be an integer", field)
    val = int(obj)
    if minimum is not None and val < minimum:
        raise ScenarioError(f"must be >= {minimum}", field)
    return val


_SCENARIO_KEYS = {"m", "omega", "bodies", "dt", "t_final", "events", "seed", "name"}
_REQUIRED_KEYS = ("m", "omega", "bodies", "dt", "t_final")


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario JSON file.

    Schema: {"m", "omega", "bodies": [{"r": [x, y], "p": [px, py]} x4],
    "dt", "t_final", "events": [{"t", "plus", "minus", "delta": [dx, dy]}],
    "seed", "name"} with events/seed/name optional.  Events must be sorted
    by time and lie inside [0, t_final].
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("top level must be a JSON object")
    for key in doc:
        if key not in _SCENARIO_KEYS:
            raise ScenarioError("unknown key", key)
    for key in _REQUIRED_KEYS:
        if key not in doc:
            raise ScenarioError("missing required key", key)

    m = _require_real(doc["m"], "m", minimum=0.0, strict_min=True)
    omega = _require_real(doc["omega"], "omega", minimum=0.0, strict_min=True)
    dt = _require_real(doc["dt"], "dt", minimum=0.0, strict_min=True)
    t_final = _require_real(doc["t_final"], "t_final", minimum=0.0)

    bodies = doc["bodies"]
    if not isinstance(bodies, list) or len(bodies) != 4:
        raise ScenarioError("must be a list of exactly 4 bodies", "bodies")
    r = np.zeros((4, 2))
    p = np.zeros((4, 2))
    for i, body in enumerate(bodies):
        where = f"bodies[{i}]"
        if not isinstance(body, dict):
            raise ScenarioError("must be an object", where)
        for key in body:
            if key not in ("r", "p"):
                raise ScenarioError("unknown key", f"{where}.{key}")
        for key in ("r", "p"):
            if key not in body:
                raise ScenarioError("missing required key", f"{where}.{key}")
        r[i] = _require_vec2(body["r"], f"{where}.r")
        p[i] = _require_vec2(body["p"], f"{where}.p")

    events = []
    raw_events = doc.get("events", [])
    if not isinstance(raw_events, list):
        raise ScenarioError("must be a list", "events")
    prev_t = -math.inf
    for k, ev in enumerate(raw_events):
        where = f"events[{k}]"
        if not isinstance(ev, dict):
            raise ScenarioError("must be an object", where)
        for key in ev:
            if key not in ("t", "plus", "minus", "delta"):
                raise ScenarioError("unknown key", f"{where}.{key}")
        for key in ("t", "plus", "minus", "delta"):
            if key not in ev:
                raise ScenarioError("missing required key", f"{where}.{key}")
        t = _require_real(ev["t"], f"{where}.t", minimum=0.0)
        if t > t_final:
            raise ScenarioError(f"event time {t} exceeds t_final {t_final}", f"{where}.t")
        if t < prev_t:
            raise ScenarioError("events must be sorted by time", f"{where}.t")
        prev_t = t
        plus = _require_int(ev["plus"], f"{where}.plus")
        minus = _require_int(ev["minus"], f"{where}.minus")
        delta = _require_vec2(ev["delta"], f"{where}.delta")
        try:
            events.append(BoostEvent(t_ex=t, body_plus=plus, body_minus=minus, delta=delta))
        except LimaxError as exc:
            raise ScenarioError(str(exc), where) from exc

    seed = _require_int(doc.get("seed", DEFAULT_SEED), "seed", minimum=0)
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise ScenarioError("must be a string", "name")

    try:
        params = SystemParams(m=m, omega=omega)
        state = PhaseState(r, p)
    except LimaxError as exc:
        raise ScenarioError(str(exc)) from exc
    return Scenario(params=params, state=state, dt=dt, t_final=t_final,
                    events=tuple(events), seed=seed, name=name)


def _atomic_write_text(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".limax-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _emit(text, out_path):
    if out_path:
        _atomic_write_text(out_path, text)
    else:
        sys.stdout.write(text)


def _fmt(value) -> str:
    return repr(float(value))


_CSV_HEADER = "t," + ",".join(
    f"x{i},y{i},px{i},py{i}" for i in range(1, 5))


def _trajectory_csv(times, states) -> str:
    """CSV with one row per sample: t then x,y,px,py per body."""
    lines = [_CSV_HEADER]
    for t, flat in zip(times, states):
        cells = [_fmt(t)]
        for i in range(4):
            cells.extend((_fmt(flat[2 * i]), _fmt(flat[2 * i + 1]),
                          _fmt(flat[8 + 2 * i]), _fmt(flat[8 + 2 * i + 1])))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _row_times(dt, t_final, event_times=()):
    """The output grid: multiples of dt up to t_final, t_final itself, and
    every event time, deduplicated."""
    n = int(math.floor(t_final / dt + 1e-9))
    times = [k * dt for k in range(n + 1)]
    while times and times[-1] > t_final:
        times.pop()
    for extra in list(event_times) + [t_final]:
        if extra not in times:
            times.append(extra)
    times.sort()
    return times


def _simulate_analytic(scenario: Scenario, times):
    """Closed-form propagation, re-anchored at each boost event."""
    params = scenario.params
    anchor_state = scenario.state
    anchor_t = 0.0
    pending = list(scenario.events)
    out = np.empty((len(times), 16))
    for idx, t in enumerate(times):
        current = analytic.propagate(anchor_state, params, t - anchor_t)
        while pending and pending[0].t_ex == t:
            current = apply_pair_boost(current, pending.pop(0))
            anchor_state, anchor_t = current, t
        out[idx] = current.flat()
    return out


def _simulate_numeric(scenario: Scenario, times):
    """Fixed-step oracle propagation between consecutive output rows.

    Each interval is integrated with sub-steps no longer than scenario.dt,
    sized to land exactly on the next row time.
    """
    params = scenario.params
    current = scenario.state
    pending = list(scenario.events)
    out = np.empty((len(times), 16))
    prev_t = 0.0
    for idx, t in enumerate(times):
        if idx > 0:
            seg = t - prev_t
            n_sub = max(1, math.ceil(seg / scenario.dt - 1e-9))
            cfg = IntegratorConfig(dt=seg / n_sub, n_steps=n_sub)
            current = integrate(current, params, cfg).final_state
        while pending and pending[0].t_ex == t:
            current = apply_pair_boost(current, pending.pop(0))
        out[idx] = current.flat()
        prev_t = t
    return out


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.dt is not None:
        if not (math.isfinite(args.dt) and args.dt > 0):
            raise ScenarioError("must be > 0", "--dt")
        scenario = Scenario(scenario.params, scenario.state, args.dt,
                            scenario.t_final, scenario.events, scenario.seed, scenario.name)
    if args.t_final is not None:
        if not (math.isfinite(args.t_final) and args.t_final >= 0):
            raise ScenarioError("must be >= 0", "--t-final")
        for ev in scenario.events:
            if ev.t_ex > args.t_final:
                raise ScenarioError(
                    f"event at t={ev.t_ex} exceeds overridden t_final {args.t_final}", "--t-final")
        scenario = Scenario(scenario.params, scenario.state, scenario.dt,
                            args.t_final, scenario.events, scenario.seed, scenario.name)
    times = _row_times(scenario.dt, scenario.t_final,
                       [ev.t_ex for ev in scenario.events])
    if args.engine == "analytic":
        states = _simulate_analytic(scenario, times)
    else:
        states = _simulate_numeric(scenario, times)
    _emit(_trajectory_csv(times, states), args.out)
    return 0


def _classification_json(state, params):
    result = classify(state, params)
    return {
        "label": result.label.value,
        "sign_branch": result.sign_branch,
        "residuals": {k: float(v) for k, v in result.residuals.items()},
    }


def _verify_report(scenario: Scenario, seed: int) -> dict:
    params = scenario.params
    state = scenario.state
    duration = scenario.t_final if scenario.t_final > 0 else params.period
    times = np.linspace(0.0, duration, DRIFT_SAMPLES)
    trajectory = analytic.sample(state, params, times)

    classification = _classification_json(state, params)
    symmetric = classification["label"] == TrajectoryClass.CHOREOGRAPHY_SYMMETRIC.value

    drift_table = {}
    for name in igr.GLOBAL_INTEGRALS + ("IGEN",):
        tol = TOL_IGEN_DRIFT if name == "IGEN" else TOL_GLOBAL_DRIFT
        report = igr.integral_drift(name, trajectory, params)
        drift_table[name] = {
            "initial": float(report.samples[0][1]),
            "max_drift": report.max_drift,
            "tol": tol,
            "pass": report.max_drift <= tol,
        }

    pair_overlap = {}
    for name in ("DOT_R", "DOT_P"):
        report = igr.integral_drift(name, trajectory, params)
        pair_overlap[name] = {
            "initial": float(report.samples[0][1]),
            "max_drift": report.max_drift,
            "conserved_here": report.max_drift <= TOL_PARTICULAR,
        }
    pair_overlap["tol"] = TOL_PARTICULAR
    pair_overlap["expected_conserved"] = symmetric

    rng = np.random.default_rng(seed)
    states = [random_cm_state(rng) for _ in range(BRACKET_STATES)]

    so4 = {}
    for a, b, c in igr.SO4_CLOSURE:
        worst = max(abs(igr.poisson_bracket(a, b, s, params, BRACKET_H)
                        - igr.eval_integral(c, s, params)) for s in states)
        so4[f"{{{a},{b}}}-{c}"] = worst
    commuting = {}
    for a, b in igr.COMMUTING_PAIRS:
        worst = max(abs(igr.poisson_bracket(a, b, s, params, BRACKET_H)) for s in states)
        commuting[f"{{{a},{b}}}"] = worst
    trace_identity = max(
        abs(sum(igr.eval_integral(igr.fradkin_name(i, i), s, params) for i in range(1, 5))
            - 2.0 * igr.eval_integral("H4D", s, params)) for s in states)
    coupling = igr.measure_rotation_coupling(states, params, h=BRACKET_H)

    involution_vals = np.array(
        [igr.bracket_L_H3x(s, params) for _, s in trajectory.samples])
    involution = {
        "initial": float(involution_vals[0]),
        "max_abs_along_orbit": float(np.max(np.abs(involution_vals))),
        "drift_along_orbit": float(np.max(np.abs(involution_vals - involution_vals[0]))),
        "tol_drift": TOL_PARTICULAR,
        "vanishes_along_orbit": bool(np.max(np.abs(involution_vals)) <= TOL_PARTICULAR),
    }

    report = {
        "scenario": {
            "name": scenario.name,
            "m": params.m,
            "omega": params.omega,
            "dt": scenario.dt,
            "t_final": scenario.t_final,
            "seed": seed,
        },
        "classification": classification,
        "integral_drift": {
            "duration": float(duration),
            "n_samples": DRIFT_SAMPLES,
            "table": drift_table,
        },
        "pair_overlap": pair_overlap,
        "bracket_table": {
            "n_states": BRACKET_STATES,
            "h": BRACKET_H,
            "tol": TOL_BRACKET,
            "so4_closure": so4,
            "commuting": commuting,
            "trace_identity_max": trace_identity,
        },
        "rotation_coupling": {
            "constant": coupling.constant,
            "max_deviation": coupling.max_deviation,
            "n_samples": coupling.n_samples,
            "tol": TOL_BRACKET,
        },
        "particular_involution": involution,
    }
    report["failures"] = _strict_failures(report)
    return report


def _strict_failures(report) -> list:
    """Names of universal invariants the report violates.

    Scenario-dependent facts (classification, whether the pair overlaps
    happen to be conserved on a generic orbit) are never gated; the pair
    overlaps are gated only when the state is the symmetric choreography,
    where their conservation is part of the contract.
    """
    failures = []
    for name, entry in report["integral_drift"]["table"].items():
        if not entry["pass"]:
            failures.append(f"integral_drift:{name}")
    if report["pair_overlap"]["expected_conserved"]:
        for name in ("DOT_R", "DOT_P"):
            if not report["pair_overlap"][name]["conserved_here"]:
                failures.append(f"pair_overlap:{name}")
    table = report["bracket_table"]
    for key, value in table["so4_closure"].items():
        if value > table["tol"]:
            failures.append(f"bracket:{key}")
    for key, value in table["commuting"].items():
        if value > table["tol"]:
            failures.append(f"bracket:{key}")
    if table["trace_identity_max"] > table["tol"]:
        failures.append("bracket:trace_identity")
    if report["rotation_coupling"]["max_deviation"] > report["rotation_coupling"]["tol"]:
        failures.append("rotation_coupling")
    involution = report["particular_involution"]
    if involution["drift_along_orbit"] > involution["tol_drift"]:
        failures.append("particular_involution_drift")
    return failures


def cmd_verify(args) -> int:
    scenario = load_scenario(args.scenario)
    seed = scenario.seed if args.seed is None else args.seed
    report = _verify_report(scenario, seed)
    _emit(_json_text(report), args.out)
    if args.strict and report["failures"]:
        return 4
    return 0


def cmd_classify(args) -> int:
    scenario = load_scenario(args.scenario)
    doc = _classification_json(scenario.state, scenario.params)
    doc["cm_residual"] = cm_residual(scenario.state, scenario.params)
    _emit(_json_text(doc), args.out)
    return 0


def cmd_fragment(args) -> int:
    params = SystemParams(m=args.m, omega=args.omega)
    delta = _parse_floats(args.delta, 2, "--delta")
    before, after = fragmentation_scenario(
        params, delta, args.beta,
        horizon=args.t_final, n_samples=args.samples)
    before_path = f"{args.out}_before.csv"
    after_path = f"{args.out}_after.csv"
    _atomic_write_text(before_path, _trajectory_csv(before.times, before.states))
    _atomic_write_text(after_path, _trajectory_csv(after.times, after.states))
    boosted = after.samples[0][1]
    summary = {
        "t_ex": args.beta * params.period,
        "beta": args.beta,
        "delta": [float(delta[0]), float(delta[1])],
        "classification_after": _classification_json(boosted, params),
        "files": [before_path, after_path],
    }
    sys.stdout.write(_json_text(summary))
    return 0


def _scenario_doc(scenario: Scenario, state: PhaseState) -> dict:
    doc = {}
    if scenario.name is not None:
        doc["name"] = scenario.name
    doc.update({
        "m": scenario.params.m,
        "omega": scenario.params.omega,
        "bodies": [
            {"r": [float(state.r[i, 0]), float(state.r[i, 1])],
             "p": [float(state.p[i, 0]), float(state.p[i, 1])]}
            for i in range(4)
        ],
        "dt": scenario.dt,
        "t_final": scenario.t_final,
        "events": [],
        "seed": scenario.seed,
    })
    return doc


def cmd_fuse(args) -> int:
    scenario = load_scenario(args.scenario)
    params = scenario.params
    boosts = fusion_boosts(scenario.state, params)
    fused = apply_fusion_boosts(scenario.state, boosts)
    before = check_choreography_conditions(scenario.state, params)
    after = check_choreography_conditions(fused, params)
    meta = {
        "sign_branch": boosts.sign_branch,
        "delta_13": [float(v) for v in boosts.delta_13],
        "delta_24": [float(v) for v in boosts.delta_24],
        "residual_before": before.residuals[boosts.sign_branch],
        "residual_after": after.residuals[boosts.sign_branch],
        "classification_after": _classification_json(fused, params),
    }
    if args.out:
        _atomic_write_text(args.out, _json_text(_scenario_doc(scenario, fused)))
        meta["scenario_file"] = args.out
    sys.stdout.write(_json_text(meta))
    return 0


def cmd_orbit(args) -> int:
    params = SystemParams(m=args.m, omega=args.omega)
    values = _parse_floats(args.coeffs, 8, "--coeffs")
    coeffs = analytic.OrbitCoeffs(*values)
    if coeffs.mixes_rotation_senses():
        print("warning: coefficients mix the two rotation senses; "
              "the sampled curve is traced in both directions", file=sys.stderr)
    if not (math.isfinite(args.dt) and args.dt > 0):
        raise ScenarioError("must be > 0", "--dt")
    if not (math.isfinite(args.t_final) and args.t_final >= 0):
        raise ScenarioError("must be >= 0", "--t-final")
    times = _row_times(args.dt, args.t_final)
    lines = ["t,x,y"]
    for t in times:
        point = analytic.orbit_family_point(coeffs, params, t)
        lines.append(",".join((_fmt(t), _fmt(point[0]), _fmt(point[1]))))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _parse_floats(text, count, flag):
    parts = [piece.strip() for piece in text.split(",")]
    if len(parts) != count:
        raise ScenarioError(f"expected {count} comma-separated numbers", flag)
    try:
        values = [float(piece) for piece in parts]
    except ValueError as exc:
        raise ScenarioError(str(exc), flag) from exc
    if not all(math.isfinite(v) for v in values):
        raise ScenarioError("values must be finite", flag)
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="limax",
        description="Planar four-body oscillator chain: exact trajectories, "
                    "integral verification, and choreography experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="emit a trajectory CSV for a scenario")
    p_sim.add_argument("scenario")
    p_sim.add_argument("--engine", choices=("analytic", "numeric"), default="analytic")
    p_sim.add_argument("--dt", type=float, default=None, help="override scenario dt")
    p_sim.add_argument("--t-final", type=float, default=None, help="override scenario t_final")
    p_sim.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p_sim.set_defaults(func=cmd_simulate)

    p_ver = sub.add_parser("verify", help="run the conservation and bracket suites")
    p_ver.add_argument("scenario")
    p_ver.add_argument("--strict", action="store_true",
                       help="exit 4 when a universal invariant fails")
    p_ver.add_argument("--seed", type=int, default=None, help="override scenario seed")
    p_ver.add_argument("--out", default=None, help="output JSON path (default stdout)")
    p_ver.set_defaults(func=cmd_verify)

    p_cls = sub.add_parser("classify", help="classify a scenario's initial state")
    p_cls.add_argument("scenario")
    p_cls.add_argument("--out", default=None)
    p_cls.set_defaults(func=cmd_classify)

    p_frag = sub.add_parser("fragment",
                            help="boost the symmetric choreography into two pair choreographies")
    p_frag.add_argument("--m", type=float, default=1.0)
    p_frag.add_argument("--omega", type=float, default=1.0)
    p_frag.add_argument("--beta", type=int, default=1,
                        help="full cycles completed before the boost")
    p_frag.add_argument("--delta", default="-0.75,0.75", help="boost vector dx,dy")
    p_frag.add_argument("--t-final", type=float, default=None,
                        help="after-trajectory horizon (default one period)")
    p_frag.add_argument("--samples", type=int, default=DRIFT_SAMPLES)
    p_frag.add_argument("--out", default="fragment", help="output file prefix")
    p_frag.set_defaults(func=cmd_fragment)

    p_fuse = sub.add_parser("fuse", help="compute and apply the balance-restoring boosts")
    p_fuse.add_argument("scenario")
    p_fuse.add_argument("--out", default=None,
                        help="write the post-fusion scenario JSON here")
    p_fuse.set_defaults(func=cmd_fuse)

    p_orb = sub.add_parser("orbit", help="sample a closed orbit of the choreography family")
    p_orb.add_argument("--coeffs", default="1,1,1,1,0,0,0,0",
                       help="a,b,c,d,a',b',c',d' harmonic coefficients")
    p_orb.add_argument("--m", type=float, default=1.0)
    p_orb.add_argument("--omega", type=float, default=1.0)
    p_orb.add_argument("--dt", type=float, default=math.tau / 256)
    p_orb.add_argument("--t-final", type=float, default=math.tau)
    p_orb.add_argument("--out", default=None)
    p_orb.set_defaults(func=cmd_orbit)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except LimaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
