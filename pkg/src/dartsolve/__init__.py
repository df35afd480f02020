"""Darts strategy engine: skill models, checkout solvers, and the two-player
zero-sum game, with evaluation, persistence, CLI, and an advisor service."""

from importlib import resources

from .board import BoardGeometry

__version__ = "0.1.0"


def default_geometry() -> BoardGeometry:
    """The standard competition board shipped with the package."""
    text = resources.files(__package__).joinpath("board_default.json").read_text()
    return BoardGeometry.from_json(text)
