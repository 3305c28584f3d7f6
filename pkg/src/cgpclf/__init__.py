"""Seedable CGP/RCGP binary classifiers with ADASYN balancing and cross-validation."""

__version__ = "0.1.0"
