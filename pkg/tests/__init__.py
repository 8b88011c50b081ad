"""
Test suite for the QRBP transition pipeline.
"""
