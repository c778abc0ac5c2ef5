from nsdde.noise.brownian import BrownianGrid, coarsen, sample_brownian, sample_brownian_batch, steps_for
from nsdde.noise.jumps import JumpRealization, MarkDistribution, MarkMeasure, sample_jumps
from nsdde.noise.streams import stream_generator, validate_seed

__all__ = [
    "BrownianGrid",
    "JumpRealization",
    "MarkDistribution",
    "MarkMeasure",
    "coarsen",
    "sample_brownian",
    "sample_brownian_batch",
    "sample_jumps",
    "steps_for",
    "stream_generator",
    "validate_seed",
]
