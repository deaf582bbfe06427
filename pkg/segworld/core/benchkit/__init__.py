"""Intent2Part construction tooling."""
