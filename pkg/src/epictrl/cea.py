"""Cost-effectiveness analysis of control strategies.

Strategies are compared one cost functional at a time: effectiveness is the
number of infection-days averted relative to the uncontrolled epidemic, and
costs come from pricing each strategy under the chosen functional.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .cost import ALL_KINDS, CostKind, CostVector, cost_vector
from .mesh import MeshMismatchError, quadrature
from .models import ModelSpec


class UndefinedRatioError(ZeroDivisionError):
    pass


@dataclass(frozen=True, eq=False)
class Strategy:
    label: str
    costs: CostVector
    effectiveness: float
    solve_result: Optional[object] = None

    def cost(self, kind) -> float:
        return self.costs[CostKind.parse(kind)]


@dataclass(frozen=True)
class RankingRow:
    label: str
    rank: int
    dominated: bool
    icer: Optional[float]
    acer: Optional[float]
    dominated_by: Optional[str] = None


@dataclass(frozen=True)
class CeaRanking:
    kind: CostKind
    rows: tuple[RankingRow, ...]
    cost_only: bool
    # willingness-to-pay threshold used at each ranking round (full procedure only)
    thresholds: tuple[float, ...] = ()

    def rank_of(self, label: str) -> int:
        return next(r.rank for r in self.rows if r.label == label)

    def as_dict(self) -> dict[str, int]:
        return {r.label: r.rank for r in self.rows}


def effectiveness(baseline, controlled) -> float:
    """Infection-days averted: integral of ``I_baseline - I_controlled``."""
    if baseline.mesh != controlled.mesh:
        raise MeshMismatchError("baseline and controlled trajectories use different meshes")
    return quadrature(baseline["I"] - controlled["I"], baseline.mesh)


def cost_matrix(results: Sequence, model: ModelSpec, a1: float = 100.0, a2: float = 10.0) -> list[CostVector]:
    """Price every solved strategy under all four functionals."""
    if results:
        mesh = results[0].trajectory.mesh
        if any(r.trajectory.mesh != mesh for r in results):
            raise MeshMismatchError("strategies were solved on different meshes")
    return [cost_vector(r.trajectory, r.control, model, a1, a2) for r in results]


def dominates(a: Strategy, b: Strategy, kind) -> bool:
    """Strong dominance: no more costly, at least as effective, strictly better in one."""
    ca, cb = a.cost(kind), b.cost(kind)
    ea, eb = a.effectiveness, b.effectiveness
    return ca <= cb and ea >= eb and (ca < cb or ea > eb)


def dominance_filter(strategies: Sequence[Strategy], kind):
    """Split strategies into the non-dominated set and ``(dominator, dominated)`` witness pairs."""
    pairs = []
    dominated = set()
    for a in strategies:
        for b in strategies:
            if a is not b and dominates(a, b, kind):
                pairs.append((a.label, b.label))
                dominated.add(b.label)
    retained = [s for s in strategies if s.label not in dominated]
    return retained, pairs


def icer(a: Strategy, b: Strategy, kind) -> float:
    """Incremental cost-effectiveness ratio ``(C_b - C_a) / (E_b - E_a)``."""
    de = b.effectiveness - a.effectiveness
    if de == 0:
        raise UndefinedRatioError(f"ICER undefined: {a.label} and {b.label} are equally effective")
    return (b.cost(kind) - a.cost(kind)) / de


def acer(strategy: Strategy, kind) -> float:
    """Average cost-effectiveness ratio against doing nothing."""
    if strategy.effectiveness <= 0:
        raise UndefinedRatioError(f"ACER undefined: {strategy.label} has effectiveness {strategy.effectiveness}")
    return strategy.cost(kind) / strategy.effectiveness


def _safe_acer(s: Strategy, kind) -> Optional[float]:
    return acer(s, kind) if s.effectiveness > 0 else None


def rank_strategies(strategies: Sequence[Strategy], kind, effectiveness_tie_tol: float = 0.0) -> CeaRanking:
    """Rank strategies for one cost functional.

    When every pair of strategies is equally effective up to
    ``effectiveness_tie_tol`` the cheapest strategy wins and the rest follow
    by cost. Otherwise dominated strategies are removed, and the retained
    ones are ranked round by round: the cheapest remaining strategy's ACER
    is the willingness-to-pay threshold, and a more effective strategy only
    takes the round if its ICER against the current pick does not exceed
    it. Dominated strategies take the bottom ranks, ordered by cost. Ties
    keep input order.
    """
    kind = CostKind.parse(kind)
    strategies = list(strategies)
    if len({s.label for s in strategies}) != len(strategies):
        raise ValueError("strategy labels must be unique")
    if not strategies:
        return CeaRanking(kind, (), True)
    effs = [s.effectiveness for s in strategies]
    cost_only = all(abs(a - b) <= effectiveness_tie_tol for a, b in combinations(effs, 2))

    retained, pairs = dominance_filter(strategies, kind)
    dominated_by = {}
    for winner, loser in pairs:
        dominated_by.setdefault(loser, winner)
    by_eff = sorted(retained, key=lambda s: -s.effectiveness)
    icers = {}
    for more, less in zip(by_eff, by_eff[1:]):
        if more.effectiveness != less.effectiveness:
            icers[more.label] = icer(more, less, kind)

    thresholds = []
    if cost_only:
        order = sorted(strategies, key=lambda s: s.cost(kind))
    else:
        order = []
        remaining = list(retained)
        while remaining:
            pick = min(remaining, key=lambda s: s.cost(kind))
            threshold = _safe_acer(pick, kind)
            thresholds.append(threshold if threshold is not None else float("nan"))
            if threshold is not None:
                # walk up in effectiveness while the extra effect is worth its price
                for cand in sorted(remaining, key=lambda s: s.effectiveness):
                    if cand.effectiveness > pick.effectiveness and icer(pick, cand, kind) <= threshold:
                        pick = cand
            order.append(pick)
            remaining.remove(pick)
        losers = [s for s in strategies if s.label in dominated_by]
        order.extend(sorted(losers, key=lambda s: s.cost(kind)))

    rows = []
    for rank, s in enumerate(order, start=1):
        is_dominated = s.label in dominated_by
        rows.append(
            RankingRow(
                label=s.label,
                rank=rank,
                dominated=is_dominated,
                icer=None if is_dominated else icers.get(s.label),
                acer=_safe_acer(s, kind),
                dominated_by=dominated_by.get(s.label),
            )
        )
    return CeaRanking(kind, tuple(rows), cost_only, tuple(thresholds))


def rank_all(strategies: Sequence[Strategy], effectiveness_tie_tol: float = 0.0) -> dict[CostKind, CeaRanking]:
    """One ranking per cost functional."""
    return {k: rank_strategies(strategies, k, effectiveness_tie_tol) for k in ALL_KINDS}


def control_distance(a, b) -> float:
    """Sup-norm distance between two control grids (over every channel)."""
    return float(np.max(np.abs(a.as_array() - b.as_array())))
