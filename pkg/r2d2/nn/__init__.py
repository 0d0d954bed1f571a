"""
From-scratch convolutional network for Android colour images.
"""

from r2d2.nn.functional import (
    Tensor,
    ConvSpec,
    conv2d_forward,
    conv2d_backward,
    relu_forward,
    relu_backward,
    maxpool_forward,
    maxpool_backward,
    global_avg_pool_forward,
    global_avg_pool_backward,
    dense_forward,
    dense_backward,
    softmax,
    softmax_cross_entropy,
)
from r2d2.nn.layers import (
    Layer,
    Conv2D,
    MaxPool2D,
    GlobalAvgPool,
    Dense,
    InceptionLiteBlock,
    count_parameters,
)
from r2d2.nn.network import MALICIOUS_CLASS, Network, NetworkConfig
from r2d2.nn.optimizers import (
    OptimizerState,
    Optimizer,
    SGD,
    NAG,
    AdaGrad,
    AdaDelta,
    get_optimizer,
    optimizer_step,
)
from r2d2.nn.training import (
    TrainConfig,
    EpochLog,
    TrainingResult,
    train,
    accuracy,
    write_training_log,
)
from r2d2.nn.checkpoint import (
    MAGIC,
    FORMAT_VERSION,
    checkpoint_bytes,
    save_checkpoint,
    load_checkpoint,
    network_from_bytes,
)

__all__ = [
    'Tensor',
    'ConvSpec',
    'conv2d_forward',
    'conv2d_backward',
    'relu_forward',
    'relu_backward',
    'maxpool_forward',
    'maxpool_backward',
    'global_avg_pool_forward',
    'global_avg_pool_backward',
    'dense_forward',
    'dense_backward',
    'softmax',
    'softmax_cross_entropy',
    'Layer',
    'Conv2D',
    'MaxPool2D',
    'GlobalAvgPool',
    'Dense',
    'InceptionLiteBlock',
    'count_parameters',
    'MALICIOUS_CLASS',
    'Network',
    'NetworkConfig',
    'OptimizerState',
    'Optimizer',
    'SGD',
    'NAG',
    'AdaGrad',
    'AdaDelta',
    'get_optimizer',
    'optimizer_step',
    'TrainConfig',
    'EpochLog',
    'TrainingResult',
    'train',
    'accuracy',
    'write_training_log',
    'MAGIC',
    'FORMAT_VERSION',
    'checkpoint_bytes',
    'save_checkpoint',
    'load_checkpoint',
    'network_from_bytes',
]
