"""
Command-line interface for physprim
"""

from .main import cli

__all__ = ['cli']
