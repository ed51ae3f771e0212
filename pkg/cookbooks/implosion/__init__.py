"""Self-similar implosion profiles of the isentropic Euler equations."""

__owner_team__ = "Implosion"
