# errors.py
#
# Every failure a service can report. Each error carries the exit code the CLI
# returns for it and a machine-readable reason, the same way an HTTP error
# carries a status code and a detail string.


class TropkError(Exception):
    exit_code = 1
    reason = "error"

    def __init__(self, detail: str = ""):
        super().__init__(detail)
        self.detail = detail or self.__class__.__doc__ or self.reason

    def document(self) -> dict:
        return {"error": self.reason, "detail": self.detail}


# Families

class InvalidInput(TropkError):
    """The input violates a precondition."""
    exit_code = 1
    reason = "invalid_input"


class PropertyViolation(TropkError):
    """A structural property that must hold was found to fail."""
    exit_code = 2
    reason = "property_violation"


class IndeterminateSign(TropkError):
    """Enclosures cannot separate a FormalReal from zero at the configured depth."""
    exit_code = 3
    reason = "indeterminate_sign"


# core-algebra

class DimensionMismatch(InvalidInput):
    """Arguments do not share an ambient dimension."""
    reason = "dimension_mismatch"


class UnknownBasis(InvalidInput):
    """FormalReals over different declared bases were combined."""
    reason = "unknown_basis"


# fans

class NotStronglyConvex(InvalidInput):
    """The cone contains a line."""
    reason = "not_strongly_convex"


class RayOutsideSupport(InvalidInput):
    """The subdivision ray is not in the support of the fan."""
    reason = "ray_outside_support"


class OutsideSupport(InvalidInput):
    """The point is not in the support of the fan."""
    reason = "outside_support"


class NotAFan(InvalidInput):
    """The cones violate the fan axioms."""
    reason = "not_a_fan"


# compactified-fans

class ConeNotInFan(InvalidInput):
    """The cone is not a cone of the ambient fan."""
    reason = "cone_not_in_fan"


class NotAFacePair(InvalidInput):
    """The first cone is not a face of the second."""
    reason = "not_a_face_pair"


class InvalidFunctional(InvalidInput):
    """The functional does not vanish on the carrier cone."""
    reason = "invalid_functional"


# valuations

class NotConvex(InvalidInput):
    """The subgroup is not convex in the value group."""
    reason = "not_convex"


class ConditionFails(InvalidInput):
    """The restriction v|H is not a valuation on a monomial quotient."""
    reason = "condition_fails"


class LevelsNotOnResidueLattice(InvalidInput):
    """An appended level vanishes on the residue lattice."""
    reason = "levels_not_on_residue_lattice"


class NoCenter(InvalidInput):
    """The valuation has no center on the toric variety."""
    reason = "no_center"


# tropical-k

class SupportMismatch(InvalidInput):
    """The target support is not the image of the source support."""
    reason = "support_mismatch"


class InvalidUniformizer(InvalidInput):
    """The chosen uniformizer does not pair to 1 with the ray generator."""
    reason = "invalid_uniformizer"


class UnsplitFactor(InvalidInput):
    """A factor does not split over the rationals."""
    reason = "unsplit_factor"


class InfiniteIndex(InvalidInput):
    """The sublattice does not have finite index."""
    reason = "infinite_index"


class UnsupportedEntry(InvalidInput):
    """A symbol entry is neither a monomial, a constant nor a factored function."""
    reason = "unsupported_entry"


# gersten

class NotComplete(InvalidInput):
    """The fan is not complete."""
    reason = "not_complete"


class DifferentialNotSquareZero(PropertyViolation):
    """d composed with d is nonzero."""
    reason = "differential_not_square_zero"


class GerstenMismatch(PropertyViolation):
    """The top cokernel does not match the Chow oracle."""
    reason = "gersten_mismatch"
