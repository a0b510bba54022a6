"""
End-to-end tests on the planted-signal corpus.
"""
