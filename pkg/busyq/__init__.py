# BusyQ Package
# Busy-period statistics of the M|G|∞ queue: moments, shape coefficients,
# distribution function and Laplace-Stieltjes transform, with table
# reproduction and a Monte Carlo cross-check.

__version__ = "1.0.0"
