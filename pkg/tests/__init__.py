"""Test suite for the graph bundle verifier."""
