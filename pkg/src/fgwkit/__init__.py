"""fgwkit: Fused Gromov-Wasserstein distances, barycenters and graph learning."""

__version__ = "0.1.0"
