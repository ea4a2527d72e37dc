"""Acceptance suite: one PASS/FAIL line per criterion.

Run with pytest (the lines are echoed in the terminal summary) or directly
with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import random
import sys
import time
from importlib.resources import files
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import _gen  # noqa: E402
import _oracles as O  # noqa: E402

from automata_agents.agents import run_agent  # noqa: E402
from automata_agents.classes import ClassLabel, Discipline  # noqa: E402
from automata_agents.equivalence import (agent_to_automaton, automaton_to_agent,  # noqa: E402
                                         check_trace_equivalence, language_bits)
from automata_agents.fa import Dfa, nfa_to_dfa  # noqa: E402
from automata_agents.guard import Committed, GuardedAgent, Policy as GuardPolicy  # noqa: E402
from automata_agents.guard import AdversarialOracle, certify_core, guarded_step  # noqa: E402
from automata_agents.machines import EPS, Pda, replay_lba, run_lba, run_tm  # noqa: E402
from automata_agents.mas import compose_product, partition_program, run_shared_tape  # noqa: E402
from automata_agents.risk import (Policy, horizon_curve, monte_carlo_pfa,  # noqa: E402
                                  risk_reach_probability)
from automata_agents.sizing import (TaskRequirements, classify_requirements,  # noqa: E402
                                    framework_class_lookup, framework_table)
from automata_agents.specio import parse_spec  # noqa: E402
from automata_agents.verification import (PAutomaton, lba_halts, pautomata_intersect,  # noqa: E402
                                          pda_poststar, pda_prestar)

SPECS = files("automata_agents") / "data" / "specs"
RESULTS: dict[int, str] = {}


def spec(name):
    return parse_spec(SPECS / f"{name}.json")


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    return ok


# -- 1: agent <-> automaton round trips --------------------------------------

def _words(alphabet, n=6):
    return list(O.words(alphabet, n))


def _regular_case(rng):
    if rng.random() < 0.5:
        agent = _gen.random_regular_agent(rng)
        machine, _ = agent_to_automaton(agent)
        back, _ = automaton_to_agent(machine)
    else:
        machine = _gen.random_dfa(rng) if rng.random() < 0.5 else _gen.random_nfa(rng, eps=True)
        agent, _ = automaton_to_agent(machine)
        back = None
    ws = _words(agent.alphabet)
    truth = [O.regular_agent_accepts(agent, w) for w in ws]
    if isinstance(machine, Dfa):
        direct = [O.dfa_walk(machine, w) for w in ws]
    else:
        direct = [O.nfa_set_accepts(machine, w) for w in ws]
    bad = sum(a != b for a, b in zip(truth, direct))
    if back is not None:
        bad += sum(a != O.regular_agent_accepts(back, w) for a, w in zip(truth, ws))
    bits = language_bits(machine, agent.alphabet, 6)
    bad += int(np.sum(bits != np.array(truth)))
    return bad, len(ws)


def _cf_case(rng):
    if rng.random() < 0.5:
        agent = _gen.random_cf_agent(rng)
        pda, _ = agent_to_automaton(agent)
    else:
        pda = _gen.random_pda(rng)
        agent, _ = automaton_to_agent(pda)
    back, _ = automaton_to_agent(pda)
    # the oracle reads the agent's rules; the PDA is exercised through its own delta
    truth = O.cf_agent_language(agent, agent.alphabet, 6)
    via_pda = O.pda_language(pda, 6)
    via_back = O.cf_agent_language(back, back.alphabet, 6)
    ws = _words(agent.alphabet)
    bits = language_bits(pda, agent.alphabet, 6)
    bad = sum(truth[w] != via_pda[w] or truth[w] != via_back[w] or truth[w] != bool(b)
              for w, b in zip(ws, bits))
    return bad, len(ws)


def _cs_case(rng):
    if rng.random() < 0.6:
        agent = _gen.random_cs_agent(rng)
        lba, _ = agent_to_automaton(agent)
    else:
        lba = _gen.random_lba(rng)
        agent, _ = automaton_to_agent(lba)
    back, _ = automaton_to_agent(lba)
    ws = _words(agent.alphabet)
    bad = 0
    for w in ws:
        truth = O.cs_agent_exhaustive(agent, w)
        status, _ = O.lba_exhaustive(lba, w)
        bad += (truth != (status == "accept")) + (truth != O.cs_agent_exhaustive(back, w))
        bad += truth != run_lba(lba, w).accepted
    return bad, len(ws)


TC_BUDGET = 60


def _tc_case(rng):
    if rng.random() < 0.5:
        agent = _gen.random_tc_agent(rng)
        tm, _ = agent_to_automaton(agent)
    else:
        tm = _gen.random_tm(rng)
        agent, _ = automaton_to_agent(tm)
    back, _ = automaton_to_agent(tm)
    ws = _words(agent.alphabet)
    bad = 0
    for w in ws:
        truth = O.tc_agent_bounded(agent, w, TC_BUDGET)
        machine = O.tm_bounded(tm, w, TC_BUDGET)[0] == "accept"
        bad += (truth != machine) + (truth != O.tc_agent_bounded(back, w, TC_BUDGET))
        bad += truth != run_agent(back, w, TC_BUDGET).accepted
    bits = language_bits(tm, agent.alphabet, 6, budget=TC_BUDGET)
    bad += sum(O.tc_agent_bounded(agent, w, TC_BUDGET) != bool(b) for w, b in zip(ws, bits))
    return bad, len(ws)


def criterion_1(n_machines=200):
    rng = random.Random(1)
    t0 = time.perf_counter()
    parts = []
    total_bad = 0
    for name, case in (("regular", _regular_case), ("cf", _cf_case), ("cs", _cs_case),
                       ("tc", _tc_case)):
        bad = words = 0
        for _ in range(n_machines):
            b, n = case(rng)
            bad += b
            words += n
        total_bad += bad
        parts.append(f"{name} {n_machines}x ({words} words) bad={bad}")
    dt = time.perf_counter() - t0
    ok = total_bad == 0 and dt < 120
    return ok, f"{'; '.join(parts)}; {dt:.1f}s"


# -- 2: subset construction ----------------------------------------------------

def criterion_2():
    rng = random.Random(2)
    bad = words = 0
    for _ in range(200):
        nfa = _gen.random_nfa(rng, eps=rng.random() < 0.5)
        dfa = nfa_to_dfa(nfa)
        for w in O.words(nfa.alphabet, 6):
            words += 1
            bad += O.dfa_walk(dfa, w) != O.nfa_set_accepts(nfa, w)
    return bad == 0, f"200 NFAs, {words} words, disagreements={bad}"


# -- 3: pre* exactness ---------------------------------------------------------

def _targets(rng, pda):
    kind = rng.choice(("any", "empty", "configs"))
    states = rng.sample(pda.states, rng.randint(1, len(pda.states)))
    if kind == "any":
        return kind, PAutomaton.any_stack(pda, states), lambda c: c[0] in states
    if kind == "empty":
        return kind, PAutomaton.empty_stack(pda, states), lambda c: c[0] in states and not c[1]
    pool = [(q, s) for q in pda.states for s in O.stacks_up_to(pda.stack_alphabet, 2)]
    chosen = set(rng.sample(pool, rng.randint(1, 3)))
    return kind, PAutomaton.configurations(pda, chosen), lambda c: c in chosen


def criterion_3(n=100, height=4):
    rng = random.Random(3)
    configs = mismatches = confirmed_forward = 0
    for _ in range(n):
        pda = _gen.random_pda(rng, n=rng.randint(1, 3))
        kind, targets, pred = _targets(rng, pda)
        pre = pda_prestar(pda, targets)
        for q in pda.states:
            for stack in O.stacks_up_to(pda.stack_alphabet, height):
                configs += 1
                got = pre.accepts(q, stack)
                post = pda_poststar(pda, PAutomaton.configurations(pda, [(q, stack)]))
                forward = pautomata_intersect(post, targets, pda.states)
                found, truncated = O.pds_forward(pda, (q, stack), pred)
                if found:
                    confirmed_forward += 1
                wrong = got != forward or (found and not got) or (got and not found and not truncated)
                mismatches += wrong
    detail = (f"{n} PDAs, {configs} configs of height <= {height}, "
              f"disagreements={mismatches}, {confirmed_forward} reachable by explicit search")
    return mismatches == 0, detail


# -- 4: LBA halting ------------------------------------------------------------

def criterion_4(n=50):
    rng = random.Random(4)
    bad = loops = replayed = pairs = 0
    for _ in range(n):
        lba = _gen.random_lba(rng)
        for w in O.words(lba.alphabet, 3):
            pairs += 1
            chk = lba_halts(lba, w)
            status, _ = O.lba_exhaustive(lba, w)
            if status == "loop":
                bad += chk.verdict != "loops"
            else:
                bad += chk.verdict != "halts" or chk.witness != status
            for v in (run_lba(lba, w), run_lba(lba, w, memo=False)):
                bad += (v.status.value == "loop") != (status == "loop")
                if v.status.value == "loop":
                    loops += 1
                    config, first, again = v.repeat
                    if first < again and replay_lba(lba, w, first) == config == replay_lba(lba, w, again):
                        replayed += 1
    ok = bad == 0 and replayed == loops
    return ok, (f"{n} LBAs, {pairs} (machine, word) pairs, disagreements={bad}, "
                f"loops replayed {replayed}/{loops}")


# -- 5: PFA risk ---------------------------------------------------------------

def criterion_5():
    two, absorbing = spec("pfa_two_state"), spec("pfa_absorbing")
    h2 = risk_reach_probability(two, mode="horizon", horizon=2).probability
    m = two.matrices["x"]
    h2_paths = O.pfa_path_probability(m, two.initial, {1}, 2)
    ab = risk_reach_probability(absorbing, mode="absorbing").probability
    ab_h = risk_reach_probability(absorbing, mode="horizon", horizon=200).probability
    exact_ok = abs(h2 - 0.51) <= 1e-9 and abs(h2_paths - 0.51) <= 1e-9 and abs(ab - 0.6) <= 1e-9
    solve_ok = abs(ab - ab_h) <= 1e-6
    target = float(horizon_curve(absorbing, Policy.uniform(), 200)[-1])
    covered = 0
    for seed in range(20):
        r = monte_carlo_pfa(absorbing, Policy.uniform(), trials=10_000, max_steps=200, seed=seed)
        lo, hi = r.ci
        covered += lo <= target <= hi
    ok = exact_ok and solve_ok and covered >= 19
    return ok, (f"horizon2={h2:.12f} absorbing={ab:.12f} |solve-h200|={abs(ab - ab_h):.1e} "
                f"MC CI covers exact in {covered}/20 seeds")


# -- 6: right-sizing -----------------------------------------------------------

TABLE = [
    ("Rule-Based Chatbots", "Fixed decision trees, direct trigger–action logic.", "Regular (FA)"),
    ("IFTTT", "Fixed decision trees, direct trigger–action logic.", "Regular (FA)"),
    ("n8n", "Fixed decision trees, direct trigger–action logic.", "Regular (FA)"),
    ("CrewAI", "Manager–worker patterns, task decomposition and delegation.", "Context-Free (PDA)"),
    ("AutoGen (Hierarchical)", "Manager–worker patterns, task decomposition and delegation.",
     "Context-Free (PDA)"),
    ("LangGraph (Acyclic/Tree)", "Graph-based control flow for structured, nested tasks.",
     "Context-Free (PDA)"),
    ("ReAct", "Unconstrained reasoning loop with a readable/writable scratchpad.", "TC (TM)"),
    ("Auto-GPT", "Unconstrained reasoning loop with a readable/writable scratchpad.", "TC (TM)"),
    ("LangGraph (Cyclic)",
     "General graphs allowing arbitrary state transitions and memory updates.", "TC (TM)"),
]


def criterion_6():
    branches = [
        (TaskRequirements(False), ClassLabel.Regular),
        (TaskRequirements(True, Discipline.lifo), ClassLabel.ContextFree),
        (TaskRequirements(True, Discipline.arbitrary_rw), ClassLabel.TuringComplete),
    ]
    branch_ok = sum(classify_requirements(r).label is want for r, want in branches)
    rows_ok = 0
    for name, arch, cls in TABLE:
        e = framework_class_lookup(name)
        rows_ok += (e.framework, e.architecture, e.class_text) == (name, arch, cls)
    size_ok = len(framework_table()) == len(TABLE)
    ok = branch_ok == 3 and rows_ok == len(TABLE) and size_ok
    return ok, f"flowchart branches {branch_ok}/3, table rows verbatim {rows_ok}/{len(TABLE)}"


# -- 7: MAS closure ------------------------------------------------------------

def criterion_7(n=100):
    rng = random.Random(7)
    products = failed = 0
    for size in (2, 3):
        for _ in range(n):
            alphabet = _gen.SYMS[: rng.randint(1, 3)]
            agents = [_gen.random_regular_agent(rng, alphabet) for _ in range(size)]
            mode = rng.choice(("all", "any"))
            prod = compose_product(agents, accept=mode)
            products += 1
            ok, _ = check_trace_equivalence(prod, prod.dfa, 5)
            combine = all if mode == "all" else any
            for w in O.words(alphabet, 5):
                want = combine(O.regular_agent_accepts(a, w) for a in agents)
                ok = ok and O.dfa_walk(prod.dfa, w) == want
            failed += not ok
    tm_files = sorted(p.name[:-5] for p in SPECS.iterdir() if p.name.startswith("tm_"))
    runs = tm_bad = 0
    for name in tm_files:
        tm = spec(name)
        for k in (2, 3):
            system = partition_program(tm, k)
            for w in O.words(tm.alphabet, 4):
                runs += 1
                v1 = run_tm(tm, w, 200)
                v2, _log = run_shared_tape(system, w, 200)
                tm_bad += (v1.status, v1.steps, v1.snapshot) != (v2.status, v2.steps, v2.snapshot)
    ok = failed == 0 and tm_bad == 0
    return ok, (f"{products} products (2- and 3-agent), failures={failed}; "
                f"{len(tm_files)} TM programs, {runs} shared-tape runs, mismatches={tm_bad}")


# -- 8: guard containment ------------------------------------------------------

def _shadow_dfa(core: Dfa, state, symbol):
    return core.delta[(state, symbol)], ()


def _shadow_pda(core: Pda, state, stack, symbol):
    moves = []
    for z in ((stack[0],) if stack else ()) + (EPS,):
        for t, push in core.delta.get((state, symbol, z), ()):
            rest = stack[1:] if z != EPS else stack
            moves.append((t, tuple(push) + rest))
    return moves


def _guard_run(core, unsafe, steps, seed):
    cert = certify_core(core, unsafe)
    g = GuardedAgent(core, AdversarialOracle(core.states, getattr(core, "stack_alphabet", ()),
                                             seed=seed, p_declared=0.3),
                     GuardPolicy.parse("retry(3)"))
    rng = random.Random(seed)
    declared = set(core.transitions())
    state, stack = g.state, g.stack
    commits = undeclared = unsafe_hits = violations = 0
    for _ in range(steps):
        a = rng.choice(core.alphabet)
        n_log = len(g.log)
        if isinstance(core, Pda):
            options = _shadow_pda(core, state, stack, a)
        else:
            options = [_shadow_dfa(core, state, a)]
        res = guarded_step(g, a)
        if isinstance(res, Committed):
            commits += 1
            rec = [r for r in g.log[n_log:] if r.verdict == "commit"][-1]
            if isinstance(core, Pda):
                src, sym, dst, pop, push = rec.proposed
                legal = (src, sym, pop, dst, tuple(push)) in declared and src == state
            else:
                src, sym, dst = rec.proposed
                legal = (src, sym, dst) in declared and src == state
            undeclared += not legal or (g.state, g.stack) not in options
            state, stack = g.state, g.stack
        else:
            violations += 1
            undeclared += (g.state, g.stack) != (state, stack)
        unsafe_hits += g.state in unsafe
    return cert.holds, commits, violations, undeclared, unsafe_hits


def criterion_8(steps=100_000):
    parts = []
    ok = True
    for name, unsafe in (("guard_core_dfa", {"shutdown"}), ("guard_core_dpda", {"error"})):
        core = spec(name)
        certified, commits, violations, undeclared, hits = _guard_run(core, unsafe, steps, 8)
        ok = ok and certified and undeclared == 0 and hits == 0
        parts.append(f"{name}: certified={certified} steps={steps} commits={commits} "
                     f"blocked={violations} undeclared={undeclared} unsafe={hits}")
    return ok, "; ".join(parts)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8]


@pytest.mark.parametrize("n", range(1, 9))
def test_criterion(n):
    ok, detail = CRITERIA[n - 1]()
    assert report(n, ok, detail), detail


if __name__ == "__main__":
    failures = 0
    for i, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        failures += not report(i, ok, detail)
    sys.exit(1 if failures else 0)
