"""Packaged validator resources."""
