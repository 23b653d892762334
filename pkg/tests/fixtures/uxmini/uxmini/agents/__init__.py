"""Agent behaviours."""

from .base import Agent
