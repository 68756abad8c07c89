from shapetime.autodiff.custom_op import CustomOp, OpHandle, get_op, register_custom_op, registered_ops
from shapetime.autodiff.gradient import backward, finite_difference_grad, relative_error
from shapetime.autodiff.ops import DTYPE, tensor

__all__ = [
    "DTYPE",
    "CustomOp",
    "OpHandle",
    "backward",
    "finite_difference_grad",
    "get_op",
    "register_custom_op",
    "registered_ops",
    "relative_error",
    "tensor",
]
