"""critnls package."""
