"""Numerical checks of sublevel-set and core-set inequalities for convex
bodies, polynomials and random analytic functions."""

__all__ = ["geometry", "onedim", "needle", "klscore", "polydist", "zeros", "cli"]
