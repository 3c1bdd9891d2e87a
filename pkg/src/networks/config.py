from dataclasses import dataclass, fields
from typing import List, Tuple

from dataclasses_json import dataclass_json

from src.exceptions import ConfigError, DivisibilityError

PADDING_MODES = {"zero": "zeros", "reflect": "reflect"}
MAX_MODALITIES = 4


def scale_width(channels: int, width_scale: float) -> int:
    return max(1, int(round(channels * width_scale)))


@dataclass_json
@dataclass(frozen=True)
class GeneratorConfig:
    """
    Shape hyper-parameters of the generator (SRE/SPE/LAF/Cat-Conv/decoder).

    Channel counts are the full-scale values; ``width_scale`` shrinks every
    one of them for desk-scale runs.
    """

    modality_count: int = 2
    image_size: int = 256
    base_channels: int = 64
    feature_channels: int = 256
    laf_block_size: int = 128
    width_scale: float = 1.0
    style_dim: int = 8
    n_res_blocks: int = 4
    padding_mode: str = "zero"
    per_layer_style: bool = False
    eps: float = 1e-5

    def __post_init__(self):
        if not 1 <= self.modality_count <= MAX_MODALITIES:
            raise ConfigError(f"modality_count must be in 1..{MAX_MODALITIES}, got {self.modality_count}")
        if self.image_size < 32:
            raise ConfigError(f"image_size must be at least 32, got {self.image_size}")
        if self.image_size % 4:
            raise DivisibilityError(f"image_size {self.image_size} is not divisible by 4")
        if self.laf_block_size < 1 or self.laf_block_size > self.image_size:
            raise ConfigError(
                f"laf_block_size must be in 1..{self.image_size}, got {self.laf_block_size}"
            )
        if self.image_size % self.laf_block_size:
            raise DivisibilityError(
                f"image_size {self.image_size} is not divisible by laf_block_size {self.laf_block_size}"
            )
        if self.width_scale <= 0:
            raise ConfigError(f"width_scale must be positive, got {self.width_scale}")
        if self.padding_mode not in PADDING_MODES:
            raise ConfigError(f"padding_mode must be one of {sorted(PADDING_MODES)}")
        if self.style_dim < 1 or self.n_res_blocks < 1:
            raise ConfigError("style_dim and n_res_blocks must be positive")

    @property
    def base_width(self) -> int:
        return scale_width(self.base_channels, self.width_scale)

    @property
    def feature_width(self) -> int:
        return scale_width(self.feature_channels, self.width_scale)

    @property
    def feature_size(self) -> int:
        return self.image_size // 4

    @property
    def grid_shape(self) -> Tuple[int, int]:
        cells = self.image_size // self.laf_block_size
        return cells, cells

    @property
    def torch_padding_mode(self) -> str:
        return PADDING_MODES[self.padding_mode]

    @property
    def style_layer_count(self) -> int:
        """Number of (mean, std) pairs the specific encoder emits."""
        return 2 * self.n_res_blocks if self.per_layer_style else 1

    def mismatches(self, other: "GeneratorConfig") -> List[str]:
        return [
            f"{f.name}: {getattr(self, f.name)!r} != {getattr(other, f.name)!r}"
            for f in fields(self)
            if getattr(self, f.name) != getattr(other, f.name)
        ]


@dataclass_json
@dataclass(frozen=True)
class DiscriminatorConfig:
    modality_count: int = 2
    base_channels: int = 64
    width_scale: float = 1.0
    n_blocks: int = 5
    negative_slope: float = 0.2

    def __post_init__(self):
        if not 1 <= self.modality_count <= MAX_MODALITIES:
            raise ConfigError(f"modality_count must be in 1..{MAX_MODALITIES}, got {self.modality_count}")
        if self.width_scale <= 0:
            raise ConfigError(f"width_scale must be positive, got {self.width_scale}")

    @property
    def in_channels(self) -> int:
        return self.modality_count + 1

    @property
    def widths(self) -> List[int]:
        return [scale_width(self.base_channels * 2 ** k, self.width_scale) for k in range(self.n_blocks)]

    @property
    def min_resolution(self) -> int:
        return 2 ** self.n_blocks

    @classmethod
    def for_generator(cls, config: GeneratorConfig) -> "DiscriminatorConfig":
        return cls(modality_count=config.modality_count, width_scale=config.width_scale)
