"""Test suite for sbc-dephasing."""
