"""Cost-constrained social representations for selective social learning."""

__version__ = "0.1.0"
