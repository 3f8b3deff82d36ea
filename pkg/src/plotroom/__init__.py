"""Collaborative game-narrative authoring and playtesting server.

The package splits into a pure core (transcript grammar, story documents,
plots, prompt assembly, room state machine) and thin shells around it
(completion providers, snapshot storage, the HTTP service, the CLI).
"""

__version__ = "0.1.0"
