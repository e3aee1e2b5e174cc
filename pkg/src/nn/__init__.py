from .mlp import DEFAULT_HIDDEN, Mlp, mlp_forward, mlp_init
from .optim import AdamW, OptimizerState, optimizer_step
from .schedule import ScheduleState, advance_schedule, cosine_warm_restart_lr
