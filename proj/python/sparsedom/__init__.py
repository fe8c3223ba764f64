"""Dyadic sparse operators, Orlicz maximal functions and weight constants."""

from ._sparsedom import *  # noqa: F401,F403
