"""
Command-line entry points for the analysis pipeline.
"""
