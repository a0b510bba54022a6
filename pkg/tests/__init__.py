"""
Tests package.

Unit and integration tests for refertriage.
"""
