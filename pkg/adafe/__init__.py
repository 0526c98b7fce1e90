"""
adafe: an adaptive Gabor filterbank front-end for audio classification.
"""
__version__ = "0.1.0"
