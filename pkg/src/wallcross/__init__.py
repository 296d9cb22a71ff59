"""Wall-crossing formulas, Ooguri-Vafa geometry, twistor coordinates and
hyperholomorphic connections."""

__version__ = "0.1.0"

from .errors import WallcrossError  # noqa: E402,F401
