"""
Pipelines package.

Multi-experiment orchestrations built on refertriage.app.core: the noise
tolerance sweep and the paired balancing, model and embedding comparisons.
"""

__all__ = []
