"""Compiles a persona text into a complete behavior database.

Hierarchical generation, one provider query per decision:

    1. motion selection      - pick 4..6 of the 13 catalog motions
    2. expression pairing    - one face per selected motion (states = pairs)
       + initial state       - one of the formed states
    3. transition estimation - a successor for every (state, observation) cell

Replies are matched case-insensitively against catalog names; an invalid or
unparseable reply triggers a corrective re-prompt, and a transition cell that
stays invalid after all retries falls back to a self-transition with a logged
warning so the database remains total. The whole table is pre-built offline;
nothing here runs during interaction.
"""

from __future__ import annotations

import logging
import math
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence

from ..behaviordb import BehaviorDatabase, GenerationManifest, PersonaSpec
from ..catalog import (
    FACES,
    MOTION_COUNT,
    MOTIONS,
    OBSERVATION_COUNT,
    FaceCue,
    MotionCue,
    ObservationVector,
    RobotState,
    enumerate_observations,
)
from ..errors import GenerationFailed
from .prompts import (
    PromptTemplate,
    render_expression_integration,
    render_initial_state,
    render_motion_selection,
    render_transition,
)
from .providers import CompletionProvider, ProviderError

__all__ = [
    "motion_count_bounds",
    "select_motions",
    "pair_expression",
    "pick_initial_state",
    "estimate_transition",
    "build_behavior_database",
    "GenerationJob",
]

logger = logging.getLogger(__name__)

MOTION_FRACTION_LOW = 0.25
MOTION_FRACTION_HIGH = 0.5


def motion_count_bounds(catalog_size: int = MOTION_COUNT) -> tuple[int, int]:
    """Allowed selected-motion counts: the largest integer interval inside
    [0.25 * catalog_size, 0.5 * catalog_size]; (4, 6) for the 13-motion catalog."""
    return math.ceil(MOTION_FRACTION_LOW * catalog_size), math.floor(
        MOTION_FRACTION_HIGH * catalog_size
    )


def _find_names(reply: str, names: Sequence[str]) -> list[str]:
    """Candidate catalog names appearing in a reply as whole-word phrases.

    Ordered by first occurrence; at equal positions the longer name wins
    (so "wave hand big" is never read as a stray "wave hand small" prefix).
    Matching is case-insensitive and whitespace-insensitive.
    """
    text = " ".join(reply.lower().split())
    hits: list[tuple[int, int, str]] = []
    for name in names:
        m = re.search(rf"\b{re.escape(name)}\b", text)
        if m:
            hits.append((m.start(), -len(name), name))
    hits.sort()
    out: list[str] = []
    for _, _, name in hits:
        if name not in out:
            out.append(name)
    return out


def _find_one(reply: str, names: Sequence[str]) -> Optional[str]:
    """The first valid name token in a reply, or None if absent."""
    found = _find_names(reply, names)
    return found[0] if found else None


_RETRY_SUFFIX = (
    "\n\nYour previous reply ({reply!r}) was not a valid answer. Reply again "
    "using only the exact names listed above. (attempt {attempt})"
)


def _query(
    provider: CompletionProvider,
    prompt: str,
    seed: int,
    parse: Callable[[str], Optional[object]],
    stage: str,
):
    """One validated provider query with corrective re-prompts.

    Total attempts = 1 + provider.max_retries. Transport errors and invalid
    replies both consume attempts; the final failure carries the transcript.
    """
    transcript: list[tuple[str, str]] = []
    attempt_prompt = prompt
    last_error = "no attempts made"
    for attempt in range(provider.max_retries + 1):
        try:
            reply = provider.complete(attempt_prompt, seed=seed)
        except ProviderError as e:
            transcript.append((attempt_prompt, f"<provider error: {e}>"))
            last_error = str(e)
            continue
        transcript.append((attempt_prompt, reply))
        parsed = parse(reply)
        if parsed is not None:
            return parsed
        last_error = f"invalid reply: {reply!r}"
        attempt_prompt = prompt + _RETRY_SUFFIX.format(reply=reply, attempt=attempt + 2)
    raise GenerationFailed(stage, last_error, transcript)


def select_motions(
    persona: PersonaSpec,
    provider: CompletionProvider,
    templates: Optional[PromptTemplate] = None,
) -> list[MotionCue]:
    """Stage 1: the subset of catalog motions this persona will use.

    Returns 4..6 distinct motions, in reply order (the order fixes state
    indices for the rest of the build).
    """
    t = templates or PromptTemplate.default()
    lo, hi = motion_count_bounds()
    prompt = render_motion_selection(t, persona, lo, hi)
    catalog = [m.name for m in MOTIONS]

    def parse(reply: str) -> Optional[list[str]]:
        found = _find_names(reply, catalog)
        if lo <= len(found) <= hi:
            return found
        return None

    names = _query(provider, prompt, persona.seed, parse, "motion_selection")
    by_name = {m.name: m for m in MOTIONS}
    return [by_name[n] for n in names]


def pair_expression(
    motion: MotionCue,
    persona: PersonaSpec,
    provider: CompletionProvider,
    templates: Optional[PromptTemplate] = None,
) -> FaceCue:
    """Stage 2a: the facial expression displayed alongside one motion."""
    t = templates or PromptTemplate.default()
    prompt = render_expression_integration(t, persona, motion)
    catalog = [f.name for f in FACES]

    def parse(reply: str) -> Optional[str]:
        return _find_one(reply, catalog)

    name = _query(provider, prompt, persona.seed, parse, f"expression_integration[{motion.name}]")
    return next(f for f in FACES if f.name == name)


def pick_initial_state(
    states: list[RobotState],
    persona: PersonaSpec,
    provider: CompletionProvider,
    templates: Optional[PromptTemplate] = None,
) -> RobotState:
    """Stage 2b: the state the persona idles in before any interaction.

    A singleton state set short-circuits without a query; it is the only
    legal answer.
    """
    if not states:
        raise ValueError("state set must be non-empty")
    if len(states) == 1:
        return states[0]
    t = templates or PromptTemplate.default()
    prompt = render_initial_state(t, persona, states)
    by_motion = {s.motion.name: s for s in states}

    def parse(reply: str) -> Optional[str]:
        return _find_one(reply, list(by_motion))

    name = _query(provider, prompt, persona.seed, parse, "initial_state")
    return by_motion[name]


def estimate_transition(
    s: RobotState,
    o: ObservationVector,
    states: list[RobotState],
    persona: PersonaSpec,
    provider: CompletionProvider,
    templates: Optional[PromptTemplate] = None,
    on_warning: Optional[Callable[[str], None]] = None,
) -> RobotState:
    """Stage 3: the successor for one (state, observation) cell.

    Never fails: if the provider keeps answering invalidly, the cell falls
    back to a self-transition and a warning is emitted, keeping the table
    total instead of sinking a multi-hundred-query build near the end.
    """
    t = templates or PromptTemplate.default()
    prompt = render_transition(t, persona, states, s, o)
    by_motion = {st.motion.name: st for st in states}

    def parse(reply: str) -> Optional[str]:
        return _find_one(reply, list(by_motion))

    try:
        name = _query(provider, prompt, persona.seed, parse, "transition")
    except GenerationFailed as e:
        message = (
            f"transition fallback to self for state '{s.motion.name}' at "
            f"observation ({o.describe()}): {e.reason}"
        )
        logger.warning(message)
        if on_warning is not None:
            on_warning(message)
        return s
    return by_motion[name]


def build_behavior_database(
    persona: PersonaSpec,
    provider: CompletionProvider,
    templates: Optional[PromptTemplate] = None,
    progress: Optional[Callable[[int, int], None]] = None,
) -> BehaviorDatabase:
    """Run the full pipeline and assemble a validated-by-construction database.

    Transition queries are independent and issued concurrently up to
    provider.max_concurrency. `progress(completed, total)` is invoked after
    every finished pipeline query; total becomes exact once motion selection
    has fixed the state count (1 + |m| + 1 + |s| * 72).
    """
    t = templates or PromptTemplate.default()
    completed = 0
    total = 2  # selection + initial pick; grows once |m| is known
    lock = threading.Lock()

    def report(done_delta: int, new_total: Optional[int] = None):
        nonlocal completed, total
        with lock:
            completed += done_delta
            if new_total is not None:
                total = new_total
            if progress is not None:
                progress(completed, total)

    motions = select_motions(persona, provider, t)
    n_queries = 1 + len(motions) + 1 + len(motions) * OBSERVATION_COUNT
    report(1, n_queries)

    states: list[RobotState] = []
    for motion in motions:
        face = pair_expression(motion, persona, provider, t)
        states.append(RobotState(motion, face))
        report(1)

    initial = pick_initial_state(states, persona, provider, t)
    report(1)

    observations = enumerate_observations()
    state_index = {st: i for i, st in enumerate(states)}
    n = len(states)
    cells: list[list[Optional[int]]] = [[None] * OBSERVATION_COUNT for _ in range(n)]
    warnings: dict[tuple[int, int], str] = {}

    def fill(cell: tuple[int, int]) -> None:
        i, o = cell

        def warn(message: str) -> None:
            with lock:
                warnings[(i, o)] = message

        successor = estimate_transition(
            states[i], observations[o], states, persona, provider, t, on_warning=warn
        )
        cells[i][o] = state_index[successor]
        report(1)

    workers = max(1, provider.max_concurrency)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for _ in pool.map(fill, [(i, o) for i in range(n) for o in range(OBSERVATION_COUNT)]):
            pass

    manifest = GenerationManifest(
        model=provider.model,
        seed=persona.seed,
        prompt_hashes=tuple(sorted(t.hashes().items())),
        warnings=tuple(warnings[key] for key in sorted(warnings)),
    )
    return BehaviorDatabase(
        persona=persona,
        motions=[m.name for m in motions],
        states=states,
        initial_state=state_index[initial],
        transitions=cells,
        manifest=manifest,
    )


class GenerationJob:
    """A persona build with thread-safe progress polling.

    Lifecycle: pending -> running -> complete | failed. Query totals follow
    the pipeline (1 + |m| + 1 + |s| * 72 once motion selection lands).
    """

    def __init__(
        self,
        persona: PersonaSpec,
        provider: CompletionProvider,
        templates: Optional[PromptTemplate] = None,
        on_progress: Optional[Callable[[int, int], None]] = None,
    ):
        self.persona = persona
        self.provider = provider
        self.templates = templates
        self.on_progress = on_progress
        self.status = "pending"
        self.completed = 0
        self.total = 2
        self.result: Optional[BehaviorDatabase] = None
        self.error: Optional[str] = None
        self._lock = threading.Lock()

    def _progress(self, completed: int, total: int) -> None:
        with self._lock:
            self.completed = completed
            self.total = total
        if self.on_progress is not None:
            self.on_progress(completed, total)

    def run(self) -> Optional[BehaviorDatabase]:
        """Execute the build synchronously; returns None on failure."""
        with self._lock:
            self.status = "running"
        try:
            db = build_behavior_database(
                self.persona, self.provider, self.templates, progress=self._progress
            )
        except GenerationFailed as e:
            with self._lock:
                self.status = "failed"
                self.error = str(e)
            return None
        with self._lock:
            self.result = db
            self.completed = self.total
            self.status = "complete"
        return db

    def snapshot(self) -> dict:
        """Consistent progress view for pollers."""
        with self._lock:
            return {
                "persona": self.persona.name,
                "status": self.status,
                "completed": self.completed,
                "total": self.total,
                "error": self.error,
            }
