"""Exception hierarchy.

Every error raised by the library derives from ``ResonanceError``. The
``exit_code`` attribute is what the command line tool returns when the error
escapes a subcommand: 2 for schema problems, 3 for violated preconditions or
hypotheses, 4 for numerical failures.
"""


class ResonanceError(Exception):
    exit_code = 4


class SchemaError(ResonanceError):
    exit_code = 2


class PreconditionError(ResonanceError):
    exit_code = 3


class NumericalError(ResonanceError):
    exit_code = 4


# algebra
class DegreeZero(PreconditionError):
    pass


class DuplicateNode(PreconditionError):
    pass


class NotAPerfectSquare(NumericalError):
    pass


# background
class NormalizationViolated(PreconditionError):
    pass


class PoleAtDirichletPoint(PreconditionError):
    pass


class SquareRootSingularity(PreconditionError):
    pass


class OnSlit(PreconditionError):
    pass


# perturbed
class ClassViolation(PreconditionError):
    pass


class DegreeMismatch(NumericalError):
    pass


# states
class LiftAmbiguous(NumericalError):
    pass


class LawViolation(NumericalError):
    def __init__(self, law, message=""):
        self.law = law
        super().__init__(f"{law}: {message}" if message else law)


# scattering
class AmbiguousAssignment(NumericalError):
    pass


class AtBandEdge(PreconditionError):
    pass


class NonPositiveNorming(NumericalError):
    pass


class HypothesisViolation(PreconditionError):
    def __init__(self, clause, message=""):
        self.clause = clause
        super().__init__(f"{clause}: {message}" if message else clause)


# glm
class QuadratureNotConverged(NumericalError):
    pass


class NotPositive(PreconditionError):
    pass


class SupportLeak(NumericalError):
    pass


# reconstruct
class NonRealCoefficients(PreconditionError):
    pass


class BranchSelectionFailed(NumericalError):
    pass


class ClassMembershipFailed(PreconditionError):
    def __init__(self, condition, message=""):
        self.condition = condition
        super().__init__(f"{condition}: {message}" if message else condition)
