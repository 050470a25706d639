"""Vote-threshold derivation.

Each channel's threshold is proportional to its member count, clamped to the
policy's [min, max] band. A per-channel override pins the value exactly (used
for curated fixtures). The platform-wide channel is forced strictly above
every other channel's threshold regardless of formula or override, so it is
always the hardest audience to reach.
"""
from __future__ import annotations

import math
from typing import Iterable

from .types import Channel, ThresholdPolicy


def base_threshold(channel: Channel, policy: ThresholdPolicy) -> int:
    """Threshold from override or the clamped size-proportional formula,
    without the everyone-hardest adjustment."""
    if channel.threshold_override is not None:
        return channel.threshold_override
    ratio = policy.everyone_ratio if channel.is_everyone else policy.ratio
    raw = math.ceil(ratio * len(channel.member_ids))
    return max(policy.min_threshold, min(policy.max_threshold, raw))


def compute_threshold(
    channel: Channel,
    policy: ThresholdPolicy,
    other_channels: Iterable[Channel] = (),
) -> int:
    """Threshold currently in force for ``channel``.

    For the everyone channel, ``other_channels`` must contain every other
    channel in the system; the result is then at least one more than the
    highest of their thresholds.
    """
    value = base_threshold(channel, policy)
    if channel.is_everyone:
        others = [base_threshold(c, policy) for c in other_channels if not c.is_everyone]
        if others:
            value = max(value, 1 + max(others))
    return value
