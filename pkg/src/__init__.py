"""Manifold function encoder source package."""
