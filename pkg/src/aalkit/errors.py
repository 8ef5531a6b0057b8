"""Exception hierarchy shared by every module.

Each error carries a short machine-readable ``kind`` so that callers (and the
CLI) can distinguish, say, an arity mismatch from an unknown identifier
without parsing messages.
"""


class AalError(Exception):
    kind = "error"

    def __init__(self, message, kind=None):
        super().__init__(message)
        if kind is not None:
            self.kind = kind


class SignatureError(AalError):
    kind = "signature"


class TermError(AalError):
    """A term is not well formed over its signature and context."""

    kind = "ill-formed-term"


class ParseError(AalError):
    kind = "syntax"

    def __init__(self, message, kind=None, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"col {column}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message, kind)


class LatticeError(AalError):
    """Input violates a lattice or morphism axiom the operation requires."""

    kind = "invalid-lattice"


class AlgebraError(AalError):
    kind = "invalid-algebra"


class GuardError(AalError):
    """A configured size guard would be exceeded; nothing was truncated."""

    kind = "guard"


class BudgetError(AalError):
    """A budgeted engine could not produce a sound answer within its budget."""

    kind = "budget"
