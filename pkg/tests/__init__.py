"""
Test package for slepian-mtm
"""
