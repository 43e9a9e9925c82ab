from .tensor import (
    PROB_FLOOR, ShapeError, Tape, Tensor, add, as_tensor, backward, concat, concat_rows, conv1d,
    cross_entropy, getitem, matmul, maxpool_time, mean, mul, relu, reshape, same_padding,
    sigmoid, softmax, softmax_cross_entropy, stack, sub, sum, take_rows, tanh, transpose,
)
from .optim import (
    SGD, Adam, Parameter, adam_step, clip_grad_norm, glorot_uniform, grad_norm,
    make_optimizer, sgd_step, zero_grad,
)
from .checkpoint import CheckpointError, dump_checkpoint, load_checkpoint, parse_checkpoint, save_checkpoint
from .gradcheck import check_gradients, numeric_grad, relative_error
