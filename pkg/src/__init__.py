"""Graph Bundle Verifier - holonomy, symmetry and Ricci-flatness checks for graph bundles."""

__version__ = "1.0.0"
