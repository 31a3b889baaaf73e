"""Package initialization for the collective-dephasing engine."""

__version__ = "0.1.0"
__author__ = "sbc-dephasing developers"
__description__ = "Exact pure-dephasing dynamics of N two-level atoms in a common bosonic bath"
