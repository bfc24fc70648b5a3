"""stpath-certify - exact certificates for LP-based s-t path TSP approximation."""

__version__ = "0.1.0"
