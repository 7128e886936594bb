"""Tests for tagmine."""
