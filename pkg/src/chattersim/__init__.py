"""Discrete-event simulator for LLM token-streaming transports."""
from .channel import LossTrace, MarkovChannel, TraceChannel, stationary_loss_rate
from .core import (Ack, ConfigError, OverflowDiagnosis, Packet, SessionConfig, SimulationError,
                   Token, overflow_condition, validate_config)
from .engine import SessionResult, run_session, run_sessions
from .metrics import MetricsReport, compute_metrics

__version__ = "0.1.0"

__all__ = [
    "Ack", "ConfigError", "LossTrace", "MarkovChannel", "MetricsReport", "OverflowDiagnosis",
    "Packet", "SessionConfig", "SessionResult", "SimulationError", "Token", "TraceChannel",
    "compute_metrics", "overflow_condition", "run_session", "run_sessions",
    "stationary_loss_rate", "validate_config",
]
