"""Exact computations for self-similar groups acting on rooted trees and their groupoids of germs."""

__version__ = "0.1.0"
