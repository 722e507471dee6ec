"""Random walks on weighted pre-fractal graphs."""

import json

from ._hklab import *  # noqa: F401,F403
from ._hklab import check as _check
from ._hklab import generate as _generate


def generate(family, **params):
    """generate("gasket", level=3) -> WeightedGraph"""
    return _generate(json.dumps(dict(family=family, **params)))


def check(graph, name, grid=None, seed=1, threads=1):
    """Run one checker; returns the report as a dict."""
    return json.loads(_check(graph, name, json.dumps(grid or {}), seed, threads))
