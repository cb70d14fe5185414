"""Correlated photon-pair simulator: four-wave mixing in microstructure fiber.

Thin wrapper around the C++ core. The main entry points are
``load_config_file`` / ``parse_config``, ``calibrate_models`` and the
``run_power_sweep`` / ``run_spectral_scan`` / ``run_zwm`` drivers.
"""

from ._fwmpairs import *  # noqa: F401,F403
from ._fwmpairs import __version__  # noqa: F401
