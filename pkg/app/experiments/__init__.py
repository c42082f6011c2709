"""
Experiments package for the QUBO preprocessing toolkit.
This package contains the design-of-experiments and robustness harnesses.
"""
