"""Base agent type."""

from uxmini.util.textlog import log, emit


class Agent:
    def __init__(self, name):
        self.name = name
        self.pos = (0, 0)

    def act(self, world):
        log(self.name + " is idle")
        return world

    def rest(self):
        emit(self.name + " rests")


def spawn(name):
    return Agent(name)
