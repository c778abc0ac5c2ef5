from nsdde.jump_scheme.compensator import CompensatorOracle, compensator
from nsdde.jump_scheme.stepper import bin_jumps, simulate_jump, step_jump

__all__ = ["CompensatorOracle", "bin_jumps", "compensator", "simulate_jump", "step_jump"]
