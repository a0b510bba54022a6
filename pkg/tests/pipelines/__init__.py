"""
Unit tests for the comparison and noise pipelines.
"""
