"""
Built-in separable patterns

Exponential decay, exponential demand and ExpAR(2); discovered by the
pattern registry.
"""
