"""Deterministic 2D stealth-game AI sandbox.

Fixed-timestep simulation of stealth NPCs on a grid: distance-dependent
vision cones, two-level occlusion, a skill stack per agent, canvass-style
search, companion follow positions and rated cover posts.  Runs headless
with scripted inputs and serves an interactive browser sandbox.
"""

__version__ = "0.1.0"
