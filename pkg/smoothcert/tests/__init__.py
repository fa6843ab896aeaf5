"""Unit tests for smoothcert."""
