from .tensor import (
    Tensor,
    GradTape,
    Node,
    ShapeMismatch,
    DisconnectedGraphWarning,
    backward,
    no_grad,
    inject_fault,
    as_tensor,
)
from . import ops
from .ops import OPS
from .optim import AdamState, adam_step
from .params import ParamStore, MalformedCheckpoint
from .gradcheck import GradCase, check_gradients, run_suite
