"""Tests for stpath-certify."""
