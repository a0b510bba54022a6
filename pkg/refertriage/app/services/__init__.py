"""
Services module for external integrations.

Contains the HTTP client for remote sentence-embedding services.
"""
