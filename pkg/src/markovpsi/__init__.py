"""Covering-tree lifts of Markov chains and the polynomial Psi of their first minors."""
