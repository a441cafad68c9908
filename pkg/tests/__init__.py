"""Test suite for the torus bundle holonomy toolkit."""
