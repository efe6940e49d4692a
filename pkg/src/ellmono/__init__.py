"""Affine structures, Riccati monodromy and ruled-surface calculus on elliptic curves."""
