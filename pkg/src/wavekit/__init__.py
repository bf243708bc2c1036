"""wavekit: solvers and plane-wave audits for modified non-relativistic and
relativistic quantum wave equations, with standard-equation baselines."""

__version__ = "0.1.0"
