"""Rolling-shutter image formation simulator and correction toolkit."""

try:
    from ._rstk import *  # noqa: F401,F403
except ImportError:  # build tree on PYTHONPATH instead of an installed wheel
    from _rstk import *  # noqa: F401,F403
