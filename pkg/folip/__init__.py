"""
folip Package
Minimum-cost Herbrand models of first-order clauses by branch-price-and-cut,
with a Markov logic network MAP frontend.
"""

__version__ = "1.0.0"
