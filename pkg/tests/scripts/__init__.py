"""
Unit tests for CLI scripts.
"""
