"""Numerical core: measures, limit laws, sampling, eigenpairs and overlaps."""
