"""Single-photon routing by a synthetic giant atom on two frequency lattices."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AdiabaticityWarning, ConfigurationError, IntegrationError, InvalidParameterError,
    SingularPointError,
)
from .model import (  # noqa: E402
    EffectiveParams, FullModelParams, Generator, LatticeGrid, SingleExcitationState,
    build_effective_generator, build_full_generator, derive_effective_params,
)
from .dynamics import (  # noqa: E402
    PacketSpec, PhaseSchedule, RoutingResult, Trajectory, catch_initial_state,
    catch_probability, evolve, gaussian_packet, routing_coefficients, simulate_packet,
)
from .scattering import (  # noqa: E402
    ScatteringAmplitudes, ScatteringInput, closed_form_amplitudes, oracle_amplitudes, sweep,
)
