"""Constrained Barankin-type bounds (CBTB, LU-CBTB, CCRB, LU-CCRB) and the DOA/CM case study."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
