"""
Tests for services module.
"""
