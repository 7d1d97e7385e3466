"""Invariant quadratic gaps, threads and ray tracing for cubic polynomials with a neutral fixed point."""
from .angles import Angle, Arc, Chord, FULL_CIRCLE, sigma, preimages, orbit_type, in_arc, cyclic_order
from .cubic import CubicMap, critical_points, escape_iterations, green_potential
from .gaps import GapSpec, GapApprox, PQPGHole, grow_gap, pqpg_holes, tau, verify_two_to_one
from .threads import InfiniteThread, Thread, eta, detect_period
from .rays import RayPath, trace_dynamic_ray, trace_parameter_ray, wake_membership
from .render import Window, SliceImage, render_slice

__version__ = "0.1.0"
