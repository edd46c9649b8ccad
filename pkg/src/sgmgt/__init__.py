"""Stochastic-gradient monomial-gamma samplers."""
