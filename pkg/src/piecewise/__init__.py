"""Groups acting by piecewise translations on labelled graphs."""

from .labelled_graph import (Letter, LabelledGraph, build_cayley, enumerate_ball, letter_action, validate)
from .gluing import glue, pocket_extension, rooted_gluing, star_extension, build_bubble, build_houghton
from .perm_engine import FinPerm, GroupElement, PiecewiseGroup, normal_form
from .walk_engine import Measure, Distribution, convolve, return_probability, monte_carlo_return
from .profile_engine import lambda_profile, check_cheeger, ProfileTable

__all__ = [
    "Letter", "LabelledGraph", "build_cayley", "enumerate_ball", "letter_action", "validate",
    "glue", "pocket_extension", "rooted_gluing", "star_extension", "build_bubble", "build_houghton",
    "FinPerm", "GroupElement", "PiecewiseGroup", "normal_form",
    "Measure", "Distribution", "convolve", "return_probability", "monte_carlo_return",
    "lambda_profile", "check_cheeger", "ProfileTable",
]
__version__ = "0.1.0"
