"""Desk-scale numerics for weighted l2 sequence spaces on the circle.

Submodules: fourier (transforms and coefficient algebra), weights
(weight sequences and regularity diagnostics), blocks (plateau building
blocks), localizer (smooth localizing functions), baire (pair space and
deletion runs), thresholds (divergence constructions and support
hypothesis tests), sidon (representation counting), cli.
"""

__version__ = "0.1.0"
