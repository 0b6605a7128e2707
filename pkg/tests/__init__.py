"""
Test suite for sykmonitor
"""
