"""Toolkit-level exception types (the symbolic engine has its own)."""


class ContactMechError(Exception):
    """Base class for toolkit errors."""


class SingularModelError(ContactMechError):
    """Operation requires a regular Lagrangian but the model is singular."""


class NonCanonicalFormError(ContactMechError):
    """Operation requires the canonical contact form on a phase chart."""


class DegenerateContactFormError(ContactMechError):
    """The supplied one-form is not a contact form where one is required."""


class HamiltonianMismatchError(ContactMechError):
    """The Hamiltonian does not pull back to the Lagrangian energy."""


class InconsistentResolutionError(ContactMechError):
    """The Liouville-field resolution has a nonvanishing residual."""


class VerificationError(ContactMechError):
    """A construction-time identity that must hold failed its check."""


class SingularWithoutReductionError(ContactMechError):
    """Simulation of a singular model could not close the acceleration system."""


class StepRejectedError(ContactMechError):
    """A trajectory monitor exceeded the blow-up guard."""


class ModelFileError(ContactMechError):
    """Malformed model file."""

    def __init__(self, message, line: int = -1):
        self.line = line
        where = f" (line {line})" if line >= 0 else ""
        super().__init__(f"{message}{where}")
