from .blocks import (
    EPSILON,
    AdaINResBlock,
    AdaptiveInstanceNorm,
    BlockGrid,
    CatConvFusion,
    InstanceNorm,
    LocalAdaptiveFusion,
    ResBlock,
    StyleStats,
    adain,
    cat_conv_forward,
    instance_norm,
    laf_forward,
    partition_blocks,
    reassemble_blocks,
)
from .checkpoint import FORMAT_VERSION, Checkpoint, checkpoint_name, load_checkpoint, save_checkpoint
from .config import DiscriminatorConfig, GeneratorConfig
from .discriminator import Discriminator
from .encoders import SharedEncoder, SpecificEncoder
from .generator import Decoder, Generator, parameter_count

__all__ = [
    "EPSILON",
    "AdaINResBlock",
    "AdaptiveInstanceNorm",
    "BlockGrid",
    "CatConvFusion",
    "Checkpoint",
    "Decoder",
    "Discriminator",
    "DiscriminatorConfig",
    "FORMAT_VERSION",
    "Generator",
    "GeneratorConfig",
    "InstanceNorm",
    "LocalAdaptiveFusion",
    "ResBlock",
    "SharedEncoder",
    "SpecificEncoder",
    "StyleStats",
    "adain",
    "cat_conv_forward",
    "checkpoint_name",
    "instance_norm",
    "laf_forward",
    "load_checkpoint",
    "parameter_count",
    "partition_blocks",
    "reassemble_blocks",
    "save_checkpoint",
]
