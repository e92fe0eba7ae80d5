"""Discrete quantum groups as direct sums of matrix blocks.

Multipliers, reduced functionals and their convolution, Haar data with the
modular automorphism, slice maps of multipliers of ``B (x) A`` and the
finite-rank factorization / almost-periodicity detector built on them.
"""

from .algebra import *  # noqa: F401,F403
from .functionals import *  # noqa: F401,F403
from .linalg import *  # noqa: F401,F403
from .models import *  # noqa: F401,F403
from .rules import *  # noqa: F401,F403
from .scalars import EXACT, FLOAT, Field, GaussianRational, parse_scalar, scalar_to_json  # noqa: F401
from .scenario import ParseError, Scenario, ValidationError, load_scenario, parse_scenario  # noqa: F401
from .slicing import *  # noqa: F401,F403
from .verify import *  # noqa: F401,F403

__version__ = "0.1.0"
