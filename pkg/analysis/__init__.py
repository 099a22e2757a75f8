"""
Analysis engines: moment fitting, the GRR bounds for processes and fields,
supremum tails and the Hoelder iff diagnostics.

Submodules are imported explicitly (``from analysis.grr import compute_B``).
"""
