"""Test suite for the manifold function encoder."""
