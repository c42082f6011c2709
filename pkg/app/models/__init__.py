"""
Models package for the QUBO preprocessing toolkit.
This package contains the instance model, the reduction rules, the degree-cap
expansion and the reference solvers.
"""
