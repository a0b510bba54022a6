"""
Core modelling and evaluation package.

Flat modules, one per concern: corpus loading and enrichment, embeddings,
perturbation, rebalancing, classifiers, cross-validation, statistics,
projection and capture economics.
"""
