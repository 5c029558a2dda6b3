"""Aerodynamic-model-integrated wind estimation for small fixed-wing UAVs."""
