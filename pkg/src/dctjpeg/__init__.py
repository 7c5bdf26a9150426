"""Minimal-decoding JPEG toolkit operating on DCT coefficients."""
