"""Interferometric fidelity and coherence measures between quantum states."""

from .channels import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .gluings import *  # noqa: F401,F403
from .interferometer import *  # noqa: F401,F403
from .measures import *  # noqa: F401,F403
from .numerics import *  # noqa: F401,F403
from .states import *  # noqa: F401,F403

__version__ = "0.1.0"
