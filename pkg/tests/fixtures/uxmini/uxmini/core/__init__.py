"""Simulation core: the engine loop and the world grid."""
