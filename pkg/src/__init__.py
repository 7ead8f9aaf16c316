"""Constrained joint spectral radius toolkit; modules import as `src.*`.
"""
