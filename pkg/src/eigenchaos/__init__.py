"""Numerical laboratory for eigenvector decorrelation of random symmetric matrices.

Submodules
----------
matrix_core   ensembles, sampling, eigendecomposition, matrix text format
partitions    admissible block partitions and k-block unions
dynamics      matrix OU process, Poisson-clocked block OU, block resampling
spectral      overlaps, eigenvalue derivatives, spacing and delocalization statistics
paths         interpolation paths between a matrix and a resampled copy
identities    Monte Carlo checks of the variance identities
experiments   config-driven scaling experiments
oracles       fast finite-difference and closed-form gate
version       build hash and requirements digest
cli           command line entry point (``eigenchaos``)
"""
__version__ = "0.1.0"
