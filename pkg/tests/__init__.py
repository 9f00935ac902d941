"""Tests for the bode-pid-tuner package."""
