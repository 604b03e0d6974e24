"""Qubit color representation: encode channels as RY angles, operate, measure, decode."""

from .colorcodec import (
    ChannelEncoding,
    HsvColor,
    RgbColor,
    channel_from_prob0,
    decode_rgb,
    encode_hsv_circuit,
    encode_rgb_circuit,
    hsv_to_rgb,
    rgb_to_hsv,
    theta_from_channel,
)
from .entangle import (
    ChordSignal,
    EntangleSpec,
    PlanGate,
    RestoreReport,
    channel_entangle_circuit,
    cross_image_entangle,
    data_entangle_circuit,
    dislocation_experiment,
    hsv_control_circuit,
    symmetric_restore,
)
from .imagecodec import (
    EXACT,
    PixelRecord,
    PositionEncoding,
    Recipe,
    decode_position_coordinate,
    decode_position_sequence,
    encode_position_coordinate,
    encode_position_sequence,
    process_image,
)
from .imageio import ImageBuffer, load_image, save_image
from .qstate import (
    BlochVector,
    Circuit,
    Gate,
    ProbEstimate,
    Statevector,
    apply_circuit,
    apply_gate,
    bloch_vector,
    exact_probabilities,
    inverse_circuit,
    marginal_prob0,
    sample_shots,
    zero_state,
)

__version__ = "0.1.0"
