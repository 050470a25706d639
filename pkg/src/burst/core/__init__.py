from .engine import Engine
from .threshold import base_threshold, compute_threshold
from .types import (
    BurstOption,
    BurstOutcome,
    BurstState,
    Channel,
    EngineConfig,
    Event,
    FeedEntry,
    Notification,
    Post,
    ThresholdPolicy,
    User,
)

__all__ = [
    "Engine",
    "base_threshold",
    "compute_threshold",
    "BurstOption",
    "BurstOutcome",
    "BurstState",
    "Channel",
    "EngineConfig",
    "Event",
    "FeedEntry",
    "Notification",
    "Post",
    "ThresholdPolicy",
    "User",
]
