"""Weighted k-server on uniform metrics: work functions, algorithms, lower bounds."""
