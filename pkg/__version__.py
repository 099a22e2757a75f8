"""Version information for hyperlab."""

__version__ = "0.3.0"
__version_info__ = (0, 3, 0)

# Version history
VERSION_HISTORY = {
    "0.1.0": "Exact-covariance samplers and the one-parameter GRR engine",
    "0.2.0": "Rectangular increments, field constants and supremum tail experiments",
    "0.3.0": "Hoelder iff reports, manifests and the subcommand CLI"
}
