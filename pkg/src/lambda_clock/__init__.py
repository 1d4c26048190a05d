"""Clock time as accumulated Fisher distinguishability.

Classical Fisher metrics and path lengths, quantum (QFI, Fubini-Study, Bures)
geometry, unitary dynamics reparameterized by path length, clock calibration
and quality scores, and record-based relative-entropy sums.
"""

from .classical import *  # noqa: F401,F403
from .clock import *  # noqa: F401,F403
from .config import *  # noqa: F401,F403
from .dynamics import *  # noqa: F401,F403
from .estimators import ClockReconstructor
from .exceptions import *  # noqa: F401,F403
from .quantum import *  # noqa: F401,F403
from .records import *  # noqa: F401,F403
from .scenarios import ScenarioConfig, ScenarioReport, emit_report, run_scenario

__version__ = "0.1.0"
