"""
Core logic tests package.

Unit tests for the experiment logic in refertriage/app/core.
"""
