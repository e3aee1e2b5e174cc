from .tensor import (Tape, Tensor, active_tape, add, as_tensor, backward, exp, log,
                     log_sigmoid, log_sum_exp, matmul, mul, neg, reduce_sum, relu, reshape,
                     segment_sum, sigmoid, take)
