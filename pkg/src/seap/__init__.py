"""Threshold endorsement of satellite TEE keys by a ground-station committee, with a
deterministic simulator for adversarial networks."""

from .committee import Committee, propose_and_sign_handover, satellite_update_committee, verify_handover_chain
from .config import ScenarioConfig, load_config
from .crypto import generate_keypair, get_suite, sign, verify
from .errors import SeapError
from .perf import bandwidth_model, cert_time_model, compute_threshold, latency_model
from .satellite import ProtocolParams, find_quorum

__version__ = "0.1.0"

__all__ = [
    "Committee",
    "ProtocolParams",
    "ScenarioConfig",
    "SeapError",
    "bandwidth_model",
    "cert_time_model",
    "compute_threshold",
    "find_quorum",
    "generate_keypair",
    "get_suite",
    "latency_model",
    "load_config",
    "propose_and_sign_handover",
    "satellite_update_committee",
    "sign",
    "verify",
    "verify_handover_chain",
]
