"""
CLI scripts for referral triage experiments.
"""
