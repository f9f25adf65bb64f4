"""Virtual laboratory for charged-particle accelerator subsystems.

Physics engines (vacuum, beam, circuit) on a shared time-series core,
a declarative scheme layer that turns validated configs into runs, and
an HTTP service with the labctl command-line driver on top.
"""

from .timeseries import ChannelError, TimeSeries
from .ode import ODESystem, SolverError, SolverSettings, integrate_ivp

__version__ = "0.1.0"

__all__ = [
    "ChannelError",
    "ODESystem",
    "SolverError",
    "SolverSettings",
    "TimeSeries",
    "integrate_ivp",
    "__version__",
]
