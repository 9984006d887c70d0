"""Energy-efficient power allocation for downlink NOMA."""

__version__ = "0.1.0"

from .system_model import (ChannelState, DerivedConstants, InvalidInputError, SystemParams,
                           dbm_to_watts, derived_constants, generate_channel, watts_to_dbm)
from .qos import MinPowerResult, QosProfile, is_feasible, min_power, qos_profile
from .allocation import (Allocation, AllocationSlopes, InfeasibleThetaError, ee_derivative,
                         ee_of_theta, make_allocation, optimal_coeffs, rates, slopes, sum_rate,
                         sum_rate_telescoped)
from .optimizer import (Boundary, ConvergenceError, InfeasibleProblemError, OptimizerConfig,
                        Optimum, PseudoConcavityError, dinkelbach_maximize, max_se_allocation,
                        maximize_ee)
from .tdma import TdmaConfig, TdmaResult, tdma_max_ee, tdma_min_power, tdma_rates
