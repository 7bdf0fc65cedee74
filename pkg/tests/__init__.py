"""Tests for the FaberPhase package."""
