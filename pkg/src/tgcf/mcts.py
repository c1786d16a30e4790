"""Monte Carlo tree search over perturbation sets of candidate events.

Each tree node proposes omitting one more candidate event than its parent.
An iteration selects a leaf by UCB-style descent, simulates it with a single
oracle call, expands its children, and backpropagates the normalized
prediction shift.  Counterfactual nodes are collected as they are found and
never expanded; once one of size d exists, the search restricts itself to
strictly smaller perturbation sets.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .graph import Event, TemporalGraph, candidate_events, temporal_view
from .oracle import DegenerateInstanceError, PredictorSession, delta
from .policies import Policy, make_ranking
from .result import ExplanationResult

__all__ = ["MctsConfig", "SearchNode", "sel_score", "mcts_explain"]


@dataclass(frozen=True)
class MctsConfig:
    """Search parameters; ``k = None`` uses the oracle's layer count.

    ``alpha`` trades exploitation (1.0) against exploration (0.0);
    ``best_first_stop`` ends the search at the first counterfactual found.
    """

    it_max: int = 300
    alpha: float = 2.0 / 3.0
    m_max: int = 64
    k: int | None = None
    seed: int = 0
    best_first_stop: bool = False

    def __post_init__(self) -> None:
        if self.it_max < 1:
            raise ValueError("it_max must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.m_max < 1:
            raise ValueError("m_max must be >= 1")


@dataclass(eq=False)
class SearchNode:
    """Mirror of the search-tree node tuple.

    ``p`` and ``score`` stay None until the node is simulated; ``added``
    is the event distinguishing this node from its parent.
    """

    s: frozenset[int]
    p: float | None = None
    parent: "SearchNode | None" = None
    children: list["SearchNode"] = field(default_factory=list)
    selections: int = 0
    score: float | None = None
    selectable: bool = True
    added: int | None = None

    @property
    def depth(self) -> int:
        return len(self.s)

    @property
    def simulated(self) -> bool:
        return self.score is not None

    def omission_order(self) -> tuple[int, ...]:
        order: list[int] = []
        node: SearchNode | None = self
        while node is not None and node.added is not None:
            order.append(node.added)
            node = node.parent
        return tuple(reversed(order))


def sel_score(node: SearchNode, parent: SearchNode, alpha: float) -> float:
    """UCB1-style selection score: alpha * exploit + (1 - alpha) * explore."""
    explore = math.sqrt(2.0 * math.log(parent.selections) / node.selections)
    return alpha * node.score + (1.0 - alpha) * explore


@dataclass(frozen=True)
class _CfRecord:
    events: frozenset[int]
    order: tuple[int, ...]
    logit: float
    impact: float
    discovered: int


class _Search:
    """State of one explanation run."""

    def __init__(self, session: PredictorSession, graph: TemporalGraph,
                 target: Event, policy: Policy, config: MctsConfig,
                 cutoff: tuple[float, int] | None):
        self.session = session
        self.target = target
        self.config = config
        self.full_view = temporal_view(graph, target, cutoff=cutoff)
        self.p_orig = session.predict(self.full_view, target)
        if self.p_orig == 0.0:
            raise DegenerateInstanceError(
                f"target {target.event_id} has original logit 0; "
                "the normalized shift is undefined")
        k = config.k if config.k is not None else session.num_layers
        self.candidates = candidate_events(graph, target, k, config.m_max, cutoff=cutoff)
        self.rank_pos: dict[int, int] = {}
        if len(self.candidates) > 0:
            ranking = make_ranking(policy, self.candidates, self.full_view,
                                   target, session, self.p_orig)
            self.rank_pos = ranking.position_map()
        self.cf_list: list[_CfRecord] = []
        self.min_cf_size: int | None = None
        # Fallback tracker; the root's empty set is the Δ = 0 baseline.
        self.best_impact = 0.0
        self.best_order: tuple[int, ...] = ()
        self.best_logit = self.p_orig
        self.root = SearchNode(s=frozenset(), p=self.p_orig)

    # ----------------------------------------------------------- tree rules
    def _depth_allowed(self, depth: int) -> bool:
        return self.min_cf_size is None or depth < self.min_cf_size

    def _selectable_children(self, node: SearchNode) -> list[SearchNode]:
        return [c for c in node.children
                if c.selectable and self._depth_allowed(c.depth)]

    def select(self, node: SearchNode) -> SearchNode | None:
        """Descend to the best not-yet-simulated node, restarting on dead ends."""
        while True:
            current = node
            while True:
                if not current.simulated:
                    return current
                kids = self._selectable_children(current)
                if not kids:
                    current.selectable = False
                    if current is node:
                        return None
                    break  # dead end mid-walk: restart from the top
                best = None
                best_score = -math.inf
                for child in kids:  # children are policy-ordered, ties keep the first
                    score = math.inf if not child.simulated \
                        else sel_score(child, current, self.config.alpha)
                    if score > best_score:
                        best, best_score = child, score
                current = best

    def simulate(self, node: SearchNode) -> float:
        node.p = self.session.predict_approx(
            self.full_view.with_exclusions(node.s), self.target)
        return node.p

    def expand(self, node: SearchNode) -> None:
        node.selections = 1
        impact = delta(self.p_orig, node.p)
        score = max(0.0, impact / abs(self.p_orig))
        if score > 1.0 and self.session.uses_approximation:
            # Re-confirm with the exact predictor before recording.
            node.p = self.session.predict(self.full_view.with_exclusions(node.s),
                                          self.target)
            impact = delta(self.p_orig, node.p)
            score = max(0.0, impact / abs(self.p_orig))
        node.score = score
        if impact > self.best_impact:
            self.best_impact = impact
            self.best_order = node.omission_order()
            self.best_logit = node.p
        if score > 1.0:
            node.selectable = False
            self.cf_list.append(_CfRecord(
                events=node.s, order=node.omission_order(), logit=node.p,
                impact=impact, discovered=len(self.cf_list)))
            size = node.depth
            self.min_cf_size = size if self.min_cf_size is None \
                else min(self.min_cf_size, size)
            return
        if self._depth_allowed(node.depth + 1):
            remaining = [eid for eid in self.candidates.event_ids if eid not in node.s]
            remaining.sort(key=self.rank_pos.__getitem__)
            node.children = [
                SearchNode(s=node.s | {eid}, parent=node, added=eid)
                for eid in remaining
            ]
        if not node.children:
            node.selectable = False

    def backpropagate(self, node: SearchNode | None) -> None:
        while node is not None:
            node.selections += 1
            own = max(0.0, delta(self.p_orig, node.p) / abs(self.p_orig))
            child_sum = sum(c.score * c.selections for c in node.children
                            if c.score is not None)
            node.score = (own + child_sum) / node.selections
            if not self._selectable_children(node):
                node.selectable = False
            node = node.parent

    def run(self) -> tuple[int, bool]:
        """Run the select/simulate/expand/backpropagate loop; returns
        (iterations executed, whether any counterfactual was recorded)."""
        self.expand(self.root)
        iterations = 0
        while iterations < self.config.it_max and self.root.selectable:
            selected = self.select(self.root)
            if selected is None:
                break
            self.simulate(selected)
            self.expand(selected)
            self.backpropagate(selected.parent)
            iterations += 1
            if self.config.best_first_stop and self.cf_list:
                break
        return iterations, bool(self.cf_list)

    def select_best(self) -> tuple[tuple[int, ...], float, bool]:
        """Minimum-size counterfactual (largest shift, earliest discovery on
        ties), or the maximum-shift perturbation set as fallback."""
        if self.cf_list:
            best = min(self.cf_list,
                       key=lambda r: (len(r.events), -r.impact, r.discovered))
            return best.order, best.logit, True
        return self.best_order, self.best_logit, False


def mcts_explain(session: PredictorSession, graph: TemporalGraph, target: Event,
                 policy: Policy, config: MctsConfig = MctsConfig(),
                 cutoff: tuple[float, int] | None = None) -> ExplanationResult:
    """Explain one future-link prediction by tree search over omission sets."""
    started = time.perf_counter()
    calls_before = session.call_counter
    search = _Search(session, graph, target, policy, config, cutoff)

    if len(search.candidates) == 0:
        return ExplanationResult(
            events=frozenset(), omission_order=(), is_counterfactual=False,
            achieved_logit=search.p_orig, original_logit=search.p_orig,
            oracle_calls=session.call_counter - calls_before, iterations=0,
            wall_time_s=time.perf_counter() - started, candidate_size=0)

    iterations, _ = search.run()
    order, logit, found = search.select_best()
    return ExplanationResult(
        events=frozenset(order),
        omission_order=order,
        is_counterfactual=found,
        achieved_logit=logit,
        original_logit=search.p_orig,
        oracle_calls=session.call_counter - calls_before,
        iterations=iterations,
        wall_time_s=time.perf_counter() - started,
        candidate_size=len(search.candidates),
    )
