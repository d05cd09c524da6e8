try:
    from ._core import *  # noqa: F401,F403
except ImportError:  # built outside the package (plain CMake builds)
    from _core import *  # noqa: F401,F403
