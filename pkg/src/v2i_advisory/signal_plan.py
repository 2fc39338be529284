"""Fixed-time signal plans and the controller that samples them.

A plan assigns each of the 8 phases an offset, a green duration, and a yellow
duration on a common cycle; red is whatever remains.  The controller is
stateless: the signal state at any decisecond is a pure function of the plan
and the clock, which keeps simulated runs reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .spat_codec import PHASE_COUNT, Color, PhaseState, SpatSnapshot


@dataclass(frozen=True)
class PhasePlan:
    offset_ds: int
    green_ds: int
    yellow_ds: int


@dataclass(frozen=True)
class SignalPlan:
    cycle_ds: int
    phases: Mapping[int, PhasePlan]

    def red_ds(self, phase_id: int) -> int:
        pp = self.phases[phase_id]
        return self.cycle_ds - pp.green_ds - pp.yellow_ds

    def validate(self) -> list[str]:
        """Return a list of problems, empty when the plan is sound."""
        issues = []
        if self.cycle_ds <= 0:
            issues.append(f"plan: cycle_ds must be positive, got {self.cycle_ds}")
            return issues
        if sorted(self.phases) != list(range(1, PHASE_COUNT + 1)):
            issues.append(f"plan: phases must cover 1..{PHASE_COUNT}, got {sorted(self.phases)}")
            return issues
        for pid in range(1, PHASE_COUNT + 1):
            pp = self.phases[pid]
            if pp.green_ds <= 0:
                issues.append(f"plan phase {pid}: green_ds must be positive, got {pp.green_ds}")
            if pp.yellow_ds <= 0:
                issues.append(f"plan phase {pid}: yellow_ds must be positive, got {pp.yellow_ds}")
            if not 0 <= pp.offset_ds < self.cycle_ds:
                issues.append(f"plan phase {pid}: offset_ds must be in [0, cycle), got {pp.offset_ds}")
            if pp.green_ds + pp.yellow_ds >= self.cycle_ds:
                issues.append(
                    f"plan phase {pid}: green+yellow ({pp.green_ds + pp.yellow_ds}) "
                    f"must leave red time within cycle {self.cycle_ds}"
                )
        return issues


def plan_from_dict(doc: dict) -> SignalPlan:
    """Build a SignalPlan from its JSON form (structure already checked)."""
    phases = {int(p["phase_id"]): PhasePlan(int(p["offset_ds"]), int(p["green_ds"]), int(p["yellow_ds"]))
              for p in doc["phases"]}
    return SignalPlan(cycle_ds=int(doc["cycle_ds"]), phases=phases)


def plan_to_dict(plan: SignalPlan) -> dict:
    return {
        "cycle_ds": plan.cycle_ds,
        "phases": [
            {
                "phase_id": pid,
                "offset_ds": plan.phases[pid].offset_ds,
                "green_ds": plan.phases[pid].green_ds,
                "yellow_ds": plan.phases[pid].yellow_ds,
            }
            for pid in sorted(plan.phases)
        ],
    }


def controller_state(plan: SignalPlan, t_ds: int, intersection_id: int = 0, seq: int = 0) -> SpatSnapshot:
    """Sample the fixed-time controller at decisecond ``t_ds``.

    Each phase's local cycle position u = (t_ds - offset) mod cycle is
    partitioned [0, green) green, [green, green+yellow) yellow, rest red.
    ``remaining_ds`` is the time to the next boundary (always >= 1) and
    next1/next2 are the full durations of the two following intervals.
    """
    phases = []
    for pid in range(1, PHASE_COUNT + 1):
        pp = plan.phases[pid]
        green, yellow, red = pp.green_ds, pp.yellow_ds, plan.red_ds(pid)
        u = (t_ds - pp.offset_ds) % plan.cycle_ds
        if u < green:
            state = PhaseState(pid, Color.GREEN, green - u, yellow, red)
        elif u < green + yellow:
            state = PhaseState(pid, Color.YELLOW, green + yellow - u, red, green)
        else:
            state = PhaseState(pid, Color.RED, plan.cycle_ds - u, green, yellow)
        phases.append(state)
    return SpatSnapshot(intersection_id, controller_time_ds=t_ds, seq=seq, phases=tuple(phases))
