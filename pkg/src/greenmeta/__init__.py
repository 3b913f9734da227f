"""Green Metadata decoder-power reduction requests.

Message codec, decoding-energy model, request planning, session simulation
and BD-rate analysis.
"""

__version__ = "0.1.0"

from .kernels import BACKEND as KERNEL_BACKEND
from .dor_req import (DorRequest, code_to_percent_v3, decode_hex,
                      decode_message, encode_hex, encode_message,
                      legacy_percent, percent_to_code_v3)
from .energy import (CodingCandidate, EnergyModel, LagrangeWeights, cost,
                     derdo_select, estimate_energy, fracpel_avoiding_model)
from .adaptation import (AdaptationAction, DeviceProfile, Plan, PowerTarget,
                         SavingsEntry, cumulative_ops_factor, plan_request,
                         restoration_plan, single_request_invertible)
from .profiles import builtin_names, builtin_profile, load_profile
from .session import (EncoderConfig, EnergyLedger, Scenario, SessionState,
                      apply_request_to_config, run_session, step_session)
from .analysis import (Akima, EnergyMeasurement, RdCurve, RdPoint,
                       akima_interpolate, bd_rate, build_profile,
                       relative_savings)
from .errors import GreenMetaError

__all__ = [name for name in dir() if not name.startswith("_")]
