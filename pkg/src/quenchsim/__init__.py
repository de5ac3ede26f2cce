"""quenchsim: stochastic reaction-diffusion quenching laboratory.

Simulates a two-component reaction-diffusion system whose singular absorption
terms can drive the solution to the critical level in finite time (quenching),
under multiplicative mixed Brownian / fractional-Brownian noise.  Provides the
finite-element sample-path solver, closed-form pathwise quenching-time bounds,
quenching-probability bounds, and Monte Carlo machinery to cross-validate the
two.
"""

__version__ = "0.1.0"
