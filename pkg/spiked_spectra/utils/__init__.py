"""Errors and table codecs."""
