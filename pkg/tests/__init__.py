"""Tests for tamemod."""
