"""Deterministic discrete-event simulation of the protocol under attack."""

from .adversary import STRATEGIES, AdversaryConfig
from .channel import ChannelState, corrupt_channel, validate_intervals
from .engine import SimClock
from .schedule import ContactSchedule, Pass, ScheduleConfig
from .trace import EventTrace


def run_scenario(config):
    from .runner import run_scenario as _run

    return _run(config)


__all__ = [
    "STRATEGIES",
    "AdversaryConfig",
    "ChannelState",
    "ContactSchedule",
    "EventTrace",
    "Pass",
    "ScheduleConfig",
    "SimClock",
    "corrupt_channel",
    "run_scenario",
    "validate_intervals",
]
