"""Reservation-based, flow-aware IoT MAC simulator with a CSMA/CA baseline."""
from .flows import (ConfigError, DeadlineExpired, FlowSpec, FrameConfig, LoadModel,
                    deadline_to_slots, deterministic, generate_arrivals, geometric)
from .deadline_core import (ActiveFlow, ScheduleViolation, SlotSchedule, admission_control,
                            build_schedule, llf_feasible, llf_step, maxflow_feasible)
from .adaptation import (PController, UcbState, optimal_p, play_reward, ucb_select,
                         ucb_update, update_p)
from .reservation_mac import (ContentionStats, FrameReport, MacState, new_state,
                              run_contention_phase, run_flush_frames, run_frame)
from .csma_baseline import CsmaParams, backoff_after_collision, run_csma
from .metrics import MetricError, RunMetrics, energy_per_success, throughput
from .harness import ExperimentConfig, parse_config, run_experiment, write_outputs

__version__ = "0.1.0"
