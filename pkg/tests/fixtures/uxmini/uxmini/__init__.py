"""A tiny grid-world simulation used for exercising analysis tooling."""

from .app import *
