"""Agents as automata: acceptors, constructions, verification and right-sizing."""

from __future__ import annotations

__version__ = "0.1.0"

from .agents import (CfAgent, CfRule, CsAgent, Edge, RegularAgent, ScriptedOracle,
                     SeededRandomOracle, TableOracle, TcAgent, Tokenizer, oracle_step_constrained,
                     run_agent, sample_run, tokenize_window)
from .classes import ClassLabel, Discipline
from .equivalence import (agent_to_automaton, automaton_to_agent, check_trace_equivalence,
                          plan_to_pda)
from .fa import Dfa, Mealy, Nfa, dfa_product, nfa_accepts, nfa_to_dfa, run_dfa, run_mealy
from .guard import GuardedAgent, certify_core, guarded_step
from .machines import Lba, Pda, Status, Tm, Verdict, is_deterministic_pda, run_lba, run_pda, run_tm
from .mas import compose_product, partition_program, run_shared_tape
from .risk import Pfa, Policy, monte_carlo_risk, risk_reach_probability
from .sizing import (TaskRequirements, analyze_memory_discipline, classify_requirements,
                     framework_class_lookup)
from .specio import emit, parse_spec
from .verification import (PAutomaton, capability_query, dfa_equivalence, fa_inevitability,
                           fa_safety, lba_halts, pda_prestar)

__all__ = [
    "__version__", "CfAgent", "CfRule", "CsAgent", "Edge", "RegularAgent", "ScriptedOracle",
    "SeededRandomOracle", "TableOracle", "TcAgent", "Tokenizer", "oracle_step_constrained",
    "run_agent", "sample_run", "tokenize_window", "ClassLabel", "Discipline",
    "agent_to_automaton", "automaton_to_agent", "check_trace_equivalence", "plan_to_pda", "Dfa",
    "Mealy", "Nfa", "dfa_product", "nfa_accepts", "nfa_to_dfa", "run_dfa", "run_mealy",
    "GuardedAgent", "certify_core", "guarded_step", "Lba", "Pda", "Status", "Tm", "Verdict",
    "is_deterministic_pda", "run_lba", "run_pda", "run_tm", "compose_product",
    "partition_program", "run_shared_tape", "Pfa", "Policy", "monte_carlo_risk",
    "risk_reach_probability", "TaskRequirements", "analyze_memory_discipline",
    "classify_requirements", "framework_class_lookup", "emit", "parse_spec", "PAutomaton",
    "capability_query", "dfa_equivalence", "fa_inevitability", "fa_safety", "lba_halts",
    "pda_prestar",
]
