"""Exhaustive bounded model checking of the audit biconditional.

Every abstract envelope trace of length 1..k_max is driven through a runtime
model; the per-step predicate asks whether a world-state change is matched by
an admitted audit record (and whether every admit was recorded). UNSAT means
complete enumeration found no violation; SAT carries a concrete,
minimal-length counter-example that replays.

The alphabet is the declared kinds plus OUT (the rejected-envelope symbol).
When a model declares itself memoryless in the symbol class, traces are
equivalence-reduced to IN/OUT class sequences and the verdict reports both
the raw (semantic) and reduced (enumerated) counts; the reduction is
validated against unpruned enumeration in the test suite.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Any, Callable, Sequence

from ._version import __version__
from .canonical import document_hash
from .errors import BoundTooLarge

# Reserved world-effect key for executions no envelope requested.
SPURIOUS_EFFECT = "spurious"

OUT_KEY = "OUT"

DEFAULT_BUDGET = 250_000_000
DEFAULT_MAX_EXHAUSTIVE_K = 8


@dataclass(frozen=True)
class Symbol:
    """An abstract envelope: a declared capability kind, or OUT (undeclared)."""

    kind: str | None  # None means OUT

    @property
    def in_set(self) -> bool:
        return self.kind is not None

    @property
    def key(self) -> str:
        return self.kind if self.kind is not None else OUT_KEY


def alphabet(d_kinds: Sequence[str]) -> tuple[Symbol, ...]:
    """The |kinds|+1 symbol alphabet, declared kinds sorted, OUT last."""
    kinds = sorted(set(d_kinds))
    return tuple(Symbol(k) for k in kinds) + (Symbol(None),)


@dataclass(frozen=True)
class WorldState:
    executed_count: int = 0
    executed_effects: tuple[str, ...] = ()

    def executed(self, effect: str) -> "WorldState":
        return WorldState(self.executed_count + 1, self.executed_effects + (effect,))


INITIAL_WORLD = WorldState()


@dataclass(frozen=True)
class AuditLog:
    records: tuple[tuple[str, str], ...] = ()

    def append(self, symbol_key: str, decision: str) -> "AuditLog":
        return AuditLog(self.records + ((symbol_key, decision),))


EMPTY_AUDIT = AuditLog()


@dataclass(frozen=True)
class RuntimeModel:
    """A deterministic gate/executor/audit wiring.

    The gate is the projector semantics (admit declared symbols, deny OUT);
    the wiring predicates say, per decision and current world, whether the
    envelope's effect executes, whether an audit record is appended, and
    whether a spurious effect (one no envelope requested) also executes.
    ``memoryless`` declares that all three ignore the world argument, which
    enables symbol-class pruning.
    """

    name: str
    memoryless: bool
    executes: Callable[[str, WorldState], bool]
    audits: Callable[[str, WorldState], bool]
    spurious: Callable[[str, WorldState], bool] = lambda decision, world: False

    def gate(self, symbol: Symbol, world: WorldState) -> str:
        return "admit" if symbol.in_set else "deny"


def faithful_runtime(d_kinds: Sequence[str]) -> RuntimeModel:
    """The composed projector-protected runtime: execute exactly on admit,
    audit every step."""
    _ = alphabet(d_kinds)  # validates the kind list shape
    return RuntimeModel(
        name="faithful",
        memoryless=True,
        executes=lambda decision, world: decision == "admit",
        audits=lambda decision, world: True,
    )


def mutant_execute_on_deny(d_kinds: Sequence[str]) -> RuntimeModel:
    """Executes the envelope's effect even when the gate denied it."""
    _ = alphabet(d_kinds)
    return RuntimeModel(
        name="execute-on-deny",
        memoryless=False,
        executes=lambda decision, world: True,
        audits=lambda decision, world: True,
    )


def mutant_skip_audit_on_admit(d_kinds: Sequence[str]) -> RuntimeModel:
    """Admits and executes but drops the audit record for admitted steps."""
    _ = alphabet(d_kinds)
    return RuntimeModel(
        name="skip-audit-on-admit",
        memoryless=False,
        executes=lambda decision, world: decision == "admit",
        audits=lambda decision, world: decision != "admit",
    )


def mutant_execute_without_envelope(d_kinds: Sequence[str]) -> RuntimeModel:
    """Spontaneously executes an effect no envelope requested (surfaced on
    denied steps, where no admitted record can account for it)."""
    _ = alphabet(d_kinds)
    return RuntimeModel(
        name="execute-without-envelope",
        memoryless=False,
        executes=lambda decision, world: decision == "admit",
        audits=lambda decision, world: True,
        spurious=lambda decision, world: decision == "deny",
    )


MUTANT_MODELS: dict[str, Callable[[Sequence[str]], RuntimeModel]] = {
    "execute-on-deny": mutant_execute_on_deny,
    "skip-audit-on-admit": mutant_skip_audit_on_admit,
    "execute-without-envelope": mutant_execute_without_envelope,
}

MODEL_FACTORIES: dict[str, Callable[[Sequence[str]], RuntimeModel]] = {
    "faithful": faithful_runtime,
    **MUTANT_MODELS,
}


# ---------------------------------------------------------------------------
# Stepping and the violation predicate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepOutcome:
    index: int
    symbol_key: str
    decision: str
    world_before: WorldState
    world_after: WorldState
    audit_appended: tuple[str, str] | None
    audit: AuditLog  # log state after this step


def step_model(
    model: RuntimeModel,
    world: WorldState,
    audit: AuditLog,
    symbol: Symbol,
    index: int,
) -> StepOutcome:
    decision = model.gate(symbol, world)
    after = world
    if model.executes(decision, world):
        after = after.executed(symbol.key)
    if model.spurious(decision, world):
        after = after.executed(SPURIOUS_EFFECT)
    appended = (symbol.key, decision) if model.audits(decision, world) else None
    new_audit = audit.append(*appended) if appended else audit
    return StepOutcome(index, symbol.key, decision, world, after, appended, new_audit)


def violation_predicate(step: StepOutcome) -> bool:
    """True iff this step breaks the biconditional: the world changed without
    an admitted audit record for this step, or an admit went unrecorded."""
    changed = step.world_after != step.world_before
    has_admit_record = step.audit_appended == (step.symbol_key, "admit")
    recorded = step.audit_appended is not None
    return (changed and not has_admit_record) or (step.decision == "admit" and not recorded)


def violation_class(step: StepOutcome) -> str | None:
    changed = step.world_after != step.world_before
    recorded = step.audit_appended is not None
    if changed and recorded and step.audit_appended != (step.symbol_key, "admit"):
        return "executed-but-deny"
    if changed and not recorded:
        return "executed-without-audit"
    if step.decision == "admit" and not recorded:
        return "admitted-without-audit"
    return None


def run_trace(model: RuntimeModel, symbols: Sequence[Symbol]) -> tuple[list[StepOutcome], int | None]:
    """Step a full trace; returns the outcomes and the first violating index."""
    world, audit = INITIAL_WORLD, EMPTY_AUDIT
    outcomes: list[StepOutcome] = []
    violation: int | None = None
    for i, symbol in enumerate(symbols):
        outcome = step_model(model, world, audit, symbol, i)
        outcomes.append(outcome)
        if violation is None and violation_predicate(outcome):
            violation = i
            break
        world, audit = outcome.world_after, outcome.audit
    return outcomes, violation


def _first_violation(model: RuntimeModel, symbols: Sequence[Symbol]) -> int | None:
    world, audit = INITIAL_WORLD, EMPTY_AUDIT
    for i, symbol in enumerate(symbols):
        outcome = step_model(model, world, audit, symbol, i)
        if violation_predicate(outcome):
            return i
        world, audit = outcome.world_after, outcome.audit
    return None


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


def _world_to_json(world: WorldState) -> dict[str, Any]:
    return {"count": world.executed_count, "effects": list(world.executed_effects)}


@dataclass(frozen=True)
class CounterExample:
    symbols: tuple[str, ...]
    violation_index: int
    violation_class: str
    steps: tuple[StepOutcome, ...]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "symbols": list(self.symbols),
            "violation_index": self.violation_index,
            "violation_class": self.violation_class,
            "steps": [
                {
                    "symbol": s.symbol_key,
                    "decision": s.decision,
                    "world_before": _world_to_json(s.world_before),
                    "world_after": _world_to_json(s.world_after),
                    "audit_appended": list(s.audit_appended) if s.audit_appended else None,
                    "audit": [list(r) for r in s.audit.records],
                }
                for s in self.steps
            ],
        }


@dataclass(frozen=True)
class BmcVerdict:
    result: str  # "unsat" | "sat"
    counter_example: CounterExample | None
    k_max: int
    alphabet_size: int
    traces_explored: int
    traces_enumerated: int
    instance_hash: str

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "alphabet": self.alphabet_size,
            "checker": {"name": "skillproof-bmc", "version": __version__},
            "instance_hash": self.instance_hash,
            "k_max": self.k_max,
            "result": (
                "unsat"
                if self.result == "unsat"
                else {"counter_example": self.counter_example.to_json_dict()}
            ),
            "traces_enumerated": self.traces_enumerated,
            "traces_explored": self.traces_explored,
        }


def instance_hash(d_kinds: Sequence[str], k_max: int) -> str:
    """Binds a verdict to its exact (declared kinds, bound) instance."""
    return document_hash({"caps": sorted(set(d_kinds)), "kmax": k_max})


def _make_counter_example(model: RuntimeModel, symbols: Sequence[Symbol]) -> CounterExample:
    outcomes, violation = run_trace(model, symbols)
    assert violation is not None, "counter-example construction on a clean trace"
    cls = violation_class(outcomes[violation]) or "biconditional-violation"
    return CounterExample(
        symbols=tuple(s.key for s in symbols),
        violation_index=violation,
        violation_class=cls,
        steps=tuple(outcomes),
    )


def replay_counter_example(model: RuntimeModel, ce: CounterExample) -> bool:
    """Self-validating witness: re-step the model and confirm the violation
    reproduces at the reported index."""
    symbols = tuple(Symbol(None if k == OUT_KEY else k) for k in ce.symbols)
    _, violation = run_trace(model, symbols)
    return violation == ce.violation_index


def method_c(
    model: RuntimeModel,
    d_kinds: Sequence[str],
    k_max: int,
    *,
    budget: int = DEFAULT_BUDGET,
    max_exhaustive_k: int = DEFAULT_MAX_EXHAUSTIVE_K,
) -> BmcVerdict:
    """Enumerate all traces of length 1..k_max in increasing length, DFS
    within each length; the first violation (minimal length, leftmost) stops
    the search. UNSAT verdicts carry the complete raw trace count."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    sigma = alphabet(d_kinds)
    size = len(sigma)
    total = sum(size**n for n in range(1, k_max + 1))
    if total > budget:
        raise BoundTooLarge(
            f"exhaustive enumeration of {total} traces (|alphabet|={size}, "
            f"k_max={k_max}) exceeds the budget of {budget} states; "
            f"lower k_max or use the stochastic fallback (not a proof)"
        )
    if k_max > max_exhaustive_k:
        raise BoundTooLarge(
            f"k_max={k_max} is beyond the exhaustive-mode bound of "
            f"{max_exhaustive_k} (enumeration budget {budget} states, "
            f"|alphabet|={size}); use the stochastic fallback (not a proof) "
            f"for longer horizons"
        )
    digest = instance_hash(d_kinds, k_max)
    n_in = size - 1  # number of declared-kind symbols

    explored = 0
    enumerated = 0
    if model.memoryless:
        # Symbol-class pruning: one representative per class, weighted by how
        # many concrete symbols the class stands for.
        classes: list[tuple[Symbol, int]] = []
        if n_in:
            classes.append((sigma[0], n_in))
        classes.append((sigma[-1], 1))
        for length in range(1, k_max + 1):
            for combo in itertools.product(classes, repeat=length):
                symbols = tuple(sym for sym, _ in combo)
                weight = 1
                for _, w in combo:
                    weight *= w
                enumerated += 1
                explored += weight
                if _first_violation(model, symbols) is not None:
                    return BmcVerdict(
                        result="sat",
                        counter_example=_make_counter_example(model, symbols),
                        k_max=k_max,
                        alphabet_size=size,
                        traces_explored=explored,
                        traces_enumerated=enumerated,
                        instance_hash=digest,
                    )
    else:
        for length in range(1, k_max + 1):
            for symbols in itertools.product(sigma, repeat=length):
                explored += 1
                enumerated += 1
                if _first_violation(model, symbols) is not None:
                    return BmcVerdict(
                        result="sat",
                        counter_example=_make_counter_example(model, symbols),
                        k_max=k_max,
                        alphabet_size=size,
                        traces_explored=explored,
                        traces_enumerated=enumerated,
                        instance_hash=digest,
                    )
    return BmcVerdict(
        result="unsat",
        counter_example=None,
        k_max=k_max,
        alphabet_size=size,
        traces_explored=explored,
        traces_enumerated=enumerated,
        instance_hash=digest,
    )


# ---------------------------------------------------------------------------
# Stochastic fallback (explicitly not a proof)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StochasticSearchReport:
    traces_checked: int
    counter_example: CounterExample | None
    note: str = "stochastic random-trace search; absence of a violation is not a proof"

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "checker": {"name": "skillproof-bmc", "version": __version__},
            "counter_example": (
                self.counter_example.to_json_dict() if self.counter_example else None
            ),
            "note": self.note,
            "proof": False,
            "traces_checked": self.traces_checked,
        }


def random_trace_search(
    model: RuntimeModel,
    d_kinds: Sequence[str],
    k_max: int,
    n_traces: int = 1_000_000,
    seed: int = 0,
) -> StochasticSearchReport:
    """Drive random traces of length 1..k_max through the model. A found
    violation is a genuine counter-example; finding none proves nothing."""
    sigma = alphabet(d_kinds)
    rng = random.Random(seed)
    for i in range(n_traces):
        length = rng.randint(1, k_max)
        symbols = tuple(rng.choice(sigma) for _ in range(length))
        if _first_violation(model, symbols) is not None:
            return StochasticSearchReport(
                traces_checked=i + 1,
                counter_example=_make_counter_example(model, symbols),
            )
    return StochasticSearchReport(traces_checked=n_traces, counter_example=None)
