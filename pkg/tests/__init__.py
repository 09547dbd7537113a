"""Tests for spiked_spectra."""
