"""CLI module for the LPCMCI engine.

Provides command-line interfaces for:
- Simulation of random SVAR models with latent variables
- Causal discovery on data (LPCMCI and the SVAR-FCI baselines)
- Oracle checks against the true PAG
- Replicated benchmarks
"""
