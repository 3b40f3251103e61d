"""Normative reasoning: turning a verdict plus expected utility into a decision."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .norms import NormativeResponse, RegulatoryStatus


class Decision(Enum):
    PERFORM = "PERFORM"
    ABSTAIN = "ABSTAIN"


@dataclass(frozen=True)
class ReasoningOutcome:
    decision: Decision
    response: NormativeResponse
    expected_action_utility: float
    net_utility_if_performed: float


def default_reason(response: NormativeResponse, expected_action_utility: float) -> ReasoningOutcome:
    """Never break an inviolable norm; break a violable one only when it pays.

    A forbidden action is performed iff its utility plus the (non-positive)
    penalty is strictly positive, so a break-even case abstains.
    """
    utility = float(expected_action_utility)
    net = utility + response.total_penalty
    status = response.status
    if status is RegulatoryStatus.INVIOLABLE:
        decision = Decision.ABSTAIN
    elif status is RegulatoryStatus.FORBIDDEN:
        decision = Decision.PERFORM if net > 0 else Decision.ABSTAIN
    else:
        decision = Decision.PERFORM
    return ReasoningOutcome(decision, response, utility, net)


def always_abstain(response: NormativeResponse, expected_action_utility: float) -> ReasoningOutcome:
    utility = float(expected_action_utility)
    return ReasoningOutcome(Decision.ABSTAIN, response, utility, utility + response.total_penalty)
