"""Exact homological algebra of I-adic towers and Higher Bockstein spectral sequences."""
