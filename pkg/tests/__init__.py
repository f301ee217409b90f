"""Test suite for qbo-bench"""
