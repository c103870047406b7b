"""forge: subgroup graphs, finite presentations, quotient searches and the
encoding pipeline, with certified checks throughout."""

__version__ = "0.1.0"
