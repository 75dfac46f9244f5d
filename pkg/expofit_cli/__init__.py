"""
expofit - best uniform exponential fits from the command line

Minimax fitting by a*exp(k*t) + b with a total classification of limit
cases, plus separable least-squares fitting of demand and ExpAR models.
"""

__version__ = "0.1.0"
__author__ = "expofit developers"
__description__ = "Minimax exponential fitting and separable least squares"
