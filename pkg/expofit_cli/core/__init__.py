"""
Numerical core of expofit.

Dataset handling, fixed-rate minimax solvers, the classifier, the quartet
solver and global fitter, and the separable least-squares engine.
"""
