"""SegWorld: two-pass intent-level segmentation and the Intent2Part toolkit."""

__version__ = "0.1.0"
