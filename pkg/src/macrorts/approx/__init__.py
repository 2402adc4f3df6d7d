"""Function approximators: MLPs, reverse-mode gradients, Adam, checkpoints."""
from .adam import AdamState, adam_step
from .autodiff import Tensor, parameter
from .checkpoint import load_checkpoint, save_checkpoint
from .net import (POLICY_HEAD, VALUE_HEAD, NetOutputs, NetSpec, Params, backward,
                  forward_policy, forward_value, graph_forward, init_params,
                  loss_value, param_count, policy_logits, sample_action,
                  softmax_groups)
