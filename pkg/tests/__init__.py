"""
Test package for equical.
"""
