"""Python bindings for the tripedal robot toolkit.

Angles follow the C++ core: gait amplitudes, phases, headings and wind
direction in degrees; the body heading ``RobotState.xi`` in radians.
"""

import json

from ._core import *  # noqa: F401,F403
from ._core import GaitMap, Metrics, ScenarioConfig


def as_dict(obj):
    """JSON form of a GaitMap, Metrics or ScenarioConfig as a Python dict."""
    if isinstance(obj, (GaitMap, Metrics, ScenarioConfig)):
        return json.loads(obj.to_json())
    raise TypeError(f"no JSON form for {type(obj).__name__}")
