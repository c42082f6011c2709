"""
Utility package: configuration and shared exception types.
"""
