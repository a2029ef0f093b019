"""Tests for opnet."""
