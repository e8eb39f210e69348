"""Bottom of the spectrum under coverings, on weighted graphs."""
