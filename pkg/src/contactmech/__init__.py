"""contactmech: symbolic-numeric toolkit for contact Lagrangian/Hamiltonian mechanics."""

__version__ = "0.1.0"
