"""Tests for qpgreen."""
