"""
Analysis package for the QUBO preprocessing toolkit.
This package contains coefficient sensitivity ranges for determined variables
and the factorial-design effects analysis of reduction experiments.
"""
