# coding=utf-8
"""
Integration tests for adafe.
"""
