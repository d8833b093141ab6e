"""Benchmark harness: configuration files, experiment drivers, CLI."""
