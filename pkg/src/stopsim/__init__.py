"""Prophet and secretary algorithms under downward-closed and non-monotone constraints."""

__version__ = "0.1.0"
