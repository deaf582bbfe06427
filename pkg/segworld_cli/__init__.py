"""Command-line experiments over the SegWorld library."""
