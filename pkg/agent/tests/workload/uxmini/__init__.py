"""Tiny five-function workload used to exercise the instrumentation agent."""
