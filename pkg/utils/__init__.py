"""
Utilities: run-event logging, logging setup, setup checks.
"""
