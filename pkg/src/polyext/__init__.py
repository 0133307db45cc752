"""polyext: 2D directed-polymer partition functions, multiscale structure, and extremes.

Subpackages by concern:
  env         reproducible counter-based Gaussian environment
  walk        exact simple-random-walk kernels, return probabilities, overlap R_N
  polymer     log-domain transfer-matrix sweeps (partition functions, endpoint measures)
  multiscale  time-scale schedules, partition-function ratios, barriers, diagnostics
  theory      closed-form constants, quadrature, variational problem
  oracles     exact small-scale ground truth (enumeration, difference-walk DP, transfer operator)
  experiments Monte Carlo drivers with CSV/manifest output
  cli         command-line front end
"""

__version__ = "0.1.0"
