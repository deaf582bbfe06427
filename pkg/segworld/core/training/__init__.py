"""Joint optimization of the mask and language-modeling objectives."""
