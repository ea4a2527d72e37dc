"""Command-line front end.

Exit status is the machine contract: 0 for Safe / Accept / Equivalent /
certified, 1 for Violated / Reject / Distinguished (witness printed) and
other negative outcomes, 2 for usage and validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .agents import (AGENT_TYPES, CfAgent, CsAgent, RegularAgent, TcAgent, make_oracle, run_agent,
                     sample_run)
from .classes import ClassLabel, Discipline
from .dot import to_dot
from .equivalence import (agent_to_automaton, automaton_to_agent, check_trace_equivalence,
                          validate_construction)
from .errors import AutomataError, ParseError, ValidationError
from .fa import Dfa, Mealy, Nfa, dfa_to_nfa, nfa_accepts, nfa_to_dfa, run_dfa, run_mealy
from .guard import AdversarialOracle, GuardedAgent, Policy as ViolationPolicy, certify_core, guarded_step
from .machines import Lba, Pda, Status, Tm, Verdict, run_lba, run_pda, run_tm
from .mas import ProductSystem, SharedTapeSystem, compose_product, run_shared_tape
from .risk import Pfa, Policy, agent_to_pfa, monte_carlo_pfa, risk_reach_probability
from .sizing import (MemoryTrace, TaskRequirements, analyze_memory_discipline,
                     classify_requirements, framework_class_lookup)
from .specio import dumps, emit, parse_spec
from .verification import (QUERIES, Check, PAutomaton, capability_query, dfa_equivalence, fa_inevitability,
                           fa_safety, lba_halts, pda_prestar, pda_witness)

OK, FAIL, USAGE = 0, 1, 2


class Usage(Exception):
    pass


def _word(text: str | None) -> tuple:
    return tuple(text.split()) if text else ()


def _states(text: str | None) -> list:
    return [s.strip() for s in text.split(",") if s.strip()] if text else []


def _emit(args, report: dict, lines: list) -> None:
    if args.format == "structured":
        print(json.dumps(report, indent=2, ensure_ascii=False, default=str))
    else:
        for line in lines:
            print(line)


def _write_dot(args, obj) -> None:
    if getattr(args, "dot", None):
        Path(args.dot).write_text(to_dot(obj), encoding="utf-8")


def _wfmt(w) -> str:
    return " ".join(w) if w else "ε"


# -- run ---------------------------------------------------------------------

def cmd_run(args) -> int:
    m = parse_spec(args.spec)
    w = _word(args.input)
    log = None
    if isinstance(m, Mealy):
        tr = run_mealy(m, w)
        v = Verdict(Status.ACCEPT if tr.accepted else Status.REJECT, len(w), trace=tr)
    elif isinstance(m, Dfa):
        tr = run_dfa(m, w)
        v = Verdict(Status.ACCEPT if tr.accepted else Status.REJECT, len(w), trace=tr)
    elif isinstance(m, Nfa):
        v = Verdict(Status.ACCEPT if nfa_accepts(m, w) else Status.REJECT, len(w))
    elif isinstance(m, Pda):
        v = run_pda(m, w, args.budget)
    elif isinstance(m, Lba):
        v = run_lba(m, w)
    elif isinstance(m, Tm):
        v = run_tm(m, w, args.budget)
    elif isinstance(m, RegularAgent) and args.sample:
        oracle = make_oracle({**(m.oracle_config or {}), "seed": args.seed}) \
            if (m.oracle_config or {}).get("type") == "seeded_random" else m.make_oracle()
        v = sample_run(m, w, oracle)
    elif isinstance(m, AGENT_TYPES):
        v = run_agent(m, w, args.budget)
    elif isinstance(m, ProductSystem):
        ok = m.joint_run(w)
        v = Verdict(Status.ACCEPT if ok else Status.REJECT, len(w))
    elif isinstance(m, SharedTapeSystem):
        v, log = run_shared_tape(m, w, args.budget)
    else:
        raise Usage(f"cannot run a {type(m).__name__}")
    report = {"input": list(w), **v.to_dict()}
    lines = [f"{v.status.value} after {v.steps} step(s) on {_wfmt(w)}"]
    if v.trace is not None:
        lines.append("visited: " + " ".join(map(str, v.trace.visited)))
        if v.trace.outputs:
            lines.append("outputs: " + " ".join(map(str, v.trace.outputs)))
    if v.snapshot is not None:
        lines.append(f"tape: {''.join(v.snapshot.cells)} head={v.snapshot.head} state={v.snapshot.state}")
    if v.repeat is not None:
        (q, head, cells), first, again = v.repeat
        lines.append(f"loop: configuration ({q}, {head}, {''.join(cells)}) at steps {first} and {again}")
    if log is not None:
        report["step_log"] = [r.to_dict() for r in log]
        lines.append("tick\tagent\top\tcell\tsymbol")
        lines.extend(r.line() for r in log)
    _write_dot(args, m)
    _emit(args, report, lines)
    return OK if v.accepted else FAIL


# -- convert -----------------------------------------------------------------

TARGETS = ("dfa", "nfa", "automaton", "agent")


def cmd_convert(args) -> int:
    m = parse_spec(args.spec)
    report = None
    if args.to == "dfa":
        if isinstance(m, Nfa):
            out = nfa_to_dfa(m)
        elif isinstance(m, RegularAgent):
            a, report = agent_to_automaton(m)
            out = a if isinstance(a, Dfa) else nfa_to_dfa(a)
        elif isinstance(m, Dfa):
            out = m
        else:
            raise Usage(f"cannot convert a {type(m).__name__} to a dfa")
    elif args.to == "nfa":
        if not isinstance(m, Dfa):
            raise Usage("--to nfa expects a dfa spec")
        out = dfa_to_nfa(m)
    elif args.to == "automaton":
        if not isinstance(m, AGENT_TYPES):
            raise Usage("--to automaton expects an agent spec")
        out, report = agent_to_automaton(m)
    else:
        if isinstance(m, AGENT_TYPES) or not isinstance(m, (Dfa, Nfa, Pda, Lba, Tm)):
            raise Usage("--to agent expects a machine spec")
        out, report = automaton_to_agent(m)
    if report is not None and args.max_len >= 0:
        validate_construction(m, out, report, args.max_len, args.budget)
    ok, wit = check_trace_equivalence(m, out, max(args.max_len, 0), args.budget)
    spec = emit(out)
    if args.out:
        Path(args.out).write_text(dumps(out) + "\n", encoding="utf-8")
    _write_dot(args, out)
    doc = {"spec": spec, "report": report.to_dict() if report else None,
           "conformance": {"max_len": args.max_len, "equivalent": ok,
                           "witness": list(wit) if wit is not None else None}}
    lines = [dumps(out)]
    if report is not None:
        lines.append("# construction report")
        lines.append(json.dumps(report.to_dict(), indent=2, ensure_ascii=False, default=str))
    lines.append(f"# bounded conformance (length <= {args.max_len}): {'equivalent' if ok else 'DIFFER at ' + _wfmt(wit)}")
    _emit(args, doc, lines)
    return OK if ok else FAIL


# -- verify ------------------------------------------------------------------

def _as_dfa(m):
    if isinstance(m, Dfa):
        return m
    if isinstance(m, Nfa):
        return nfa_to_dfa(m)
    if isinstance(m, RegularAgent):
        a, _ = agent_to_automaton(m)
        return a if isinstance(a, Dfa) else nfa_to_dfa(a)
    if isinstance(m, ProductSystem):
        return m.dfa
    return None


def _as_pda(m):
    if isinstance(m, Pda):
        return m
    if isinstance(m, CfAgent):
        return agent_to_automaton(m)[0]
    return None


def cmd_verify(args) -> int:
    m = parse_spec(args.spec)
    queries = [q for q in ("safety", "inevitability", "halting") if getattr(args, q)]
    if args.equivalent:
        queries.append("equivalence")
    if len(queries) != 1:
        raise Usage("choose exactly one of --safety, --inevitability, --halting, --equivalent")
    q = queries[0]
    dfa, pda = _as_dfa(m), _as_pda(m)
    if q == "safety":
        unsafe = _states(args.unsafe)
        if dfa is not None:
            res = fa_safety(dfa, unsafe)
            _write_dot(args, dfa)
        elif pda is not None:
            targets = PAutomaton.any_stack(pda, unsafe)
            pre = pda_prestar(pda, targets)
            _write_dot(args, pre)
            if pre.accepts(pda.start, pda.initial_stack):
                res = Check("violated", False, pda_witness(pda, targets), "pre*")
            else:
                res = Check("safe", True, None, "pre*", detail={"prestar_transitions": len(pre.transitions)})
        else:
            return _undecidable(args, m, q)
    elif q == "inevitability":
        if dfa is None:
            return _undecidable(args, m, q)
        res = fa_inevitability(dfa, _states(args.goal))
        _write_dot(args, dfa)
    elif q == "equivalence":
        other = parse_spec(args.equivalent)
        a, b = _as_dfa(m), _as_dfa(other)
        if a is not None and b is not None:
            res = dfa_equivalence(a, b)
        else:
            ok, wit = check_trace_equivalence(m, other, args.max_len, args.budget)
            res = Check("equivalent-up-to-bound" if ok else "distinguished", ok, wit,
                        "bounded-exhaustive", bound=args.max_len)
    else:
        w = _word(args.input)
        if isinstance(m, Lba):
            res = lba_halts(m, w)
        elif isinstance(m, CsAgent):
            res = lba_halts(agent_to_automaton(m)[0], w)
        elif dfa is not None:
            res = Check("halts", True, "accept" if run_dfa(dfa, w).accepted else "reject",
                        "input-consumption")
        elif isinstance(m, (Tm, TcAgent)):
            t = m if isinstance(m, Tm) else agent_to_automaton(m)[0]
            v = run_tm(t, w, args.budget)
            res = Check("halts" if v.status.definitive else "unknown", v.status.definitive,
                        v.status.value, "bounded-run", bound=args.budget,
                        detail={"note": "halting is undecidable for this class; result is budgeted"})
        else:
            return _undecidable(args, m, q)
    report = {"query": q, **res.to_dict()}
    lines = [f"{q}: {res.verdict} ({res.method})"]
    if res.witness is not None:
        if q == "inevitability":
            stem, cycle = res.witness
            lines.append(f"witness: stem={_wfmt(stem)} cycle={_wfmt(cycle)}")
        elif isinstance(res.witness, tuple) and all(isinstance(x, str) for x in res.witness):
            lines.append(f"witness: {_wfmt(res.witness)}")
        else:
            lines.append(f"witness: {res.witness}")
    _emit(args, report, lines)
    return OK if res.holds else FAIL


def _label_of(m) -> ClassLabel:
    if isinstance(m, (Dfa, Nfa, RegularAgent, ProductSystem)):
        return ClassLabel.Regular
    if isinstance(m, (Pda, CfAgent)):
        return ClassLabel.ContextFree
    if isinstance(m, (Lba, CsAgent)):
        return ClassLabel.ContextSensitive
    return ClassLabel.TuringComplete


def _undecidable(args, m, q) -> int:
    label = _label_of(m)
    cap = capability_query(label, q)
    report = {"query": q, "class": label.name, **cap.to_dict()}
    _emit(args, report, [f"{q} for {label.name}: {cap.status}, not checked ({cap.claim})"])
    return USAGE


# -- classify / lookup -------------------------------------------------------

def cmd_classify(args) -> int:
    if args.framework:
        return cmd_lookup(args)
    if args.trace:
        doc = json.loads(Path(args.trace).read_text(encoding="utf-8"))
        if isinstance(doc, dict):
            trace = MemoryTrace.parse(doc.get("ops", []), doc.get("input_length"), doc.get("k"))
        else:
            trace = MemoryTrace.parse(doc)
        disc = analyze_memory_discipline(trace)
    elif args.spec:
        disc = analyze_memory_discipline(parse_spec(args.spec))
    elif args.discipline:
        disc = None
    else:
        raise Usage("classify needs --framework, --spec, --trace or --discipline")
    d = disc.discipline if disc is not None else Discipline[args.discipline]
    res = classify_requirements(TaskRequirements(d is not Discipline.none, d))
    report = res.to_dict()
    lines = [res.label.name] + [f"  {p}" for p in res.path]
    if disc is not None:
        report["discipline"] = disc.to_dict()
        lines[1:1] = [f"discipline: {disc.discipline.name}"] + \
            [f"  evidence: {e['reason']}" for e in disc.evidence]
        if disc.caveat:
            lines.append(f"note: {disc.caveat}")
    _emit(args, report, lines)
    return OK


def cmd_lookup(args) -> int:
    if getattr(args, "capability", None):
        label = ClassLabel.parse(args.capability)
        queries = [args.query] if getattr(args, "query", None) else list(QUERIES)
        report = {"class": label.name, "capabilities": {q: capability_query(label, q).to_dict() for q in queries}}
        lines = [f"{label.name} ({label.machine})"]
        for q in queries:
            c = capability_query(label, q)
            flag = "" if c.implemented else " [not implemented]"
            lines.append(f"  {q}: {c.status}{flag}: {c.claim}")
        _emit(args, report, lines)
        return OK
    if not args.framework:
        raise Usage("lookup needs --framework or --capability")
    e = framework_class_lookup(args.framework)
    _emit(args, e.to_dict(), [e.label.name, f"  {e.framework}: {e.architecture} ({e.class_text})"])
    return OK


# -- compose -----------------------------------------------------------------

def cmd_compose(args) -> int:
    if args.spec:
        sysm = parse_spec(args.spec)
        if not isinstance(sysm, ProductSystem):
            raise Usage("compose --spec expects a product system spec")
    else:
        if not args.agents:
            raise Usage("compose needs --spec or --agents")
        sysm = compose_product([parse_spec(p) for p in args.agents], args.accept)
    ok, wit = check_trace_equivalence(sysm, sysm.dfa, args.max_len)
    if args.out:
        Path(args.out).write_text(dumps(sysm.dfa) + "\n", encoding="utf-8")
    _write_dot(args, sysm.dfa)
    report = {"components": len(sysm.components), "states": len(sysm.dfa.states),
              "bound": _prod([len(c.states) for c in sysm.components]), "accept": sysm.accept,
              "dfa": emit(sysm.dfa), "closure_check": {"max_len": args.max_len, "equivalent": ok,
                                                       "witness": list(wit) if wit else None}}
    lines = [f"product of {len(sysm.components)} agent(s): {len(sysm.dfa.states)} reachable "
             f"tuple state(s) (bound {report['bound']})",
             f"single-DFA closure check up to length {args.max_len}: {'ok' if ok else 'FAILED at ' + _wfmt(wit)}",
             dumps(sysm.dfa)]
    _emit(args, report, lines)
    return OK if ok else FAIL


def _prod(xs):
    out = 1
    for x in xs:
        out *= x
    return out


# -- risk --------------------------------------------------------------------

def _policy(text: str | None) -> Policy:
    if not text or text == "uniform":
        return Policy.uniform()
    kind, _, rest = text.partition(":")
    if kind == "word":
        return Policy.fixed_word(_word(rest))
    if kind == "stationary":
        weights = {}
        for part in rest.split(","):
            a, _, p = part.partition("=")
            weights[a.strip()] = float(p)
        return Policy.stationary(weights)
    raise Usage(f"unknown policy {text!r}; use uniform, word:a b c or stationary:a=0.5,b=0.5")


def cmd_risk(args) -> int:
    m = parse_spec(args.spec)
    if isinstance(m, RegularAgent):
        oracle = m.make_oracle()
        m = agent_to_pfa(m, oracle, _states(args.unsafe))
    elif not isinstance(m, Pfa):
        raise Usage("risk expects a pfa or regular agent spec")
    elif args.unsafe:
        m = m.with_unsafe(_states(args.unsafe))
    policy = _policy(args.policy)
    if args.trials:
        rep = monte_carlo_pfa(m, policy, args.trials, args.max_steps, args.seed)
    elif args.absorbing:
        rep = risk_reach_probability(m, policy, "absorbing")
    else:
        if args.horizon is None:
            raise Usage("risk needs --horizon N, --absorbing or --trials N")
        rep = risk_reach_probability(m, policy, "horizon", args.horizon)
    lines = [f"P(reach unsafe) = {rep.probability:.10g} ({rep.method})"]
    if rep.ci:
        lines.append(f"95% Wilson interval: [{rep.ci[0]:.6g}, {rep.ci[1]:.6g}] from {rep.trials} trials, seed {rep.seed}")
    _emit(args, rep.to_dict(), lines)
    return OK if rep.probability == 0 else FAIL


# -- guard -------------------------------------------------------------------

def cmd_guard(args) -> int:
    core = parse_spec(args.spec)
    if isinstance(core, RegularAgent):
        core = agent_to_automaton(core)[0]
        if not isinstance(core, Dfa):
            raise Usage("a guard core must be deterministic")
    elif isinstance(core, CfAgent):
        core = agent_to_automaton(core)[0]
    stack_alpha = getattr(core, "stack_alphabet", ())
    oracle = AdversarialOracle(core.states, stack_alpha, args.seed, args.p_declared)
    g = GuardedAgent(core, oracle, ViolationPolicy.parse(args.policy))
    report, lines, code = {}, [], OK
    if args.unsafe is not None:
        cert = certify_core(g, _states(args.unsafe))
        report["certificate"] = cert.to_dict()
        lines.append(f"certify: {cert.verdict} ({cert.method})")
        if cert.witness is not None:
            lines.append(f"witness: {_wfmt(cert.witness)}")
        code = OK if cert.holds else FAIL
    if args.input is not None or args.fuzz:
        import random
        rng = random.Random(args.seed)
        word = _word(args.input) if args.input is not None else \
            tuple(rng.choice(core.alphabet) for _ in range(args.fuzz))
        results = [guarded_step(g, a) for a in word]
        commits = sum(r.ok for r in results)
        report["run"] = {"steps": len(word), "committed": commits, "final_state": g.state,
                         "log": [r.to_dict() for r in g.log[:args.log_limit]]}
        lines.append(f"run: {commits}/{len(word)} step(s) committed, final state {g.state}")
        lines.append("step\tsymbol\tproposed\tverdict\tstate")
        lines.extend(r.line() for r in g.log[:args.log_limit])
        if commits < len(word) and args.unsafe is None:
            code = FAIL
    if not report:
        raise Usage("guard needs --unsafe, --input or --fuzz")
    _emit(args, report, lines)
    return code


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="automata-agents",
                                description="Agents as automata: run, convert, verify and right-size.")
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--budget", type=int, default=10_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--dot", metavar="PATH")
    sub = p.add_subparsers(dest="verb", required=True)

    r = sub.add_parser("run", parents=[common], help="run a machine, agent or system on one input")
    r.add_argument("--spec", required=True)
    r.add_argument("--input", default="")
    r.add_argument("--sample", action="store_true", help="sample one oracle trajectory (regular agents)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("convert", parents=[common], help="agent <-> automaton and FA constructions")
    c.add_argument("--spec", required=True)
    c.add_argument("--to", choices=TARGETS, required=True)
    c.add_argument("--out")
    c.add_argument("--max-len", type=int, default=5)
    c.set_defaults(func=cmd_convert, budget=500)

    v = sub.add_parser("verify", parents=[common], help="class-appropriate verification")
    v.add_argument("--spec", required=True)
    v.add_argument("--safety", action="store_true")
    v.add_argument("--inevitability", action="store_true")
    v.add_argument("--halting", action="store_true")
    v.add_argument("--equivalent", metavar="SPEC")
    v.add_argument("--unsafe")
    v.add_argument("--goal")
    v.add_argument("--input", default="")
    v.add_argument("--max-len", type=int, default=6)
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("classify", parents=[common], help="right-size a task, agent, trace or framework")
    k.add_argument("--framework")
    k.add_argument("--spec")
    k.add_argument("--trace")
    k.add_argument("--discipline", choices=[d.name for d in Discipline])
    k.set_defaults(func=cmd_classify)

    m = sub.add_parser("compose", parents=[common], help="lockstep product of finite agents")
    m.add_argument("--spec")
    m.add_argument("--agents", nargs="+")
    m.add_argument("--accept", choices=("all", "any"), default="all")
    m.add_argument("--out")
    m.add_argument("--max-len", type=int, default=5)
    m.set_defaults(func=cmd_compose)

    k2 = sub.add_parser("risk", parents=[common], help="probability of reaching unsafe states")
    k2.add_argument("--spec", required=True)
    k2.add_argument("--unsafe")
    k2.add_argument("--horizon", type=int)
    k2.add_argument("--absorbing", action="store_true")
    k2.add_argument("--trials", type=int)
    k2.add_argument("--max-steps", type=int, default=100)
    k2.add_argument("--policy", default="uniform")
    k2.set_defaults(func=cmd_risk)

    g = sub.add_parser("guard", parents=[common], help="certify or exercise a guarded core")
    g.add_argument("--spec", required=True)
    g.add_argument("--unsafe")
    g.add_argument("--input")
    g.add_argument("--fuzz", type=int, default=0)
    g.add_argument("--policy", default="halt")
    g.add_argument("--p-declared", type=float, default=0.5)
    g.add_argument("--log-limit", type=int, default=50)
    g.set_defaults(func=cmd_guard)

    lk = sub.add_parser("lookup", parents=[common], help="framework table and capability matrix")
    lk.add_argument("--framework")
    lk.add_argument("--capability", metavar="CLASS")
    lk.add_argument("--query", choices=QUERIES)
    lk.set_defaults(func=cmd_lookup)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE
    except (ValidationError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        for prob in getattr(exc, "problems", ()):
            print(f"  - {prob}", file=sys.stderr)
        return USAGE
    except AutomataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
