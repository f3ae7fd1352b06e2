"""Koopman-model finite-control-set MPC toolkit for inverter-fed IPMSM drives."""
