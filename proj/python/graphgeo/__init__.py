"""Graph-based IP geolocation from traceroute measurements.

Thin python surface over the C++ core: measurement parsing, synthetic
network generation, attributed-graph construction, model training, the
SLG / Corr-SLG / MLP baselines and geodesic evaluation.
"""

from graphgeo._core import *  # noqa: F401,F403

__version__ = "0.1.0"
