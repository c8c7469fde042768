class SSIError(Exception):
    """Base class for every error raised by ssikit."""


class ModelError(SSIError):
    """A model declaration is structurally wrong."""


class DuplicateId(ModelError):
    def __init__(self, id_):
        super().__init__(f"duplicate id {id_!r}")
        self.id = id_


class DanglingReference(ModelError):
    def __init__(self, id_, where=""):
        msg = f"reference to undeclared id {id_!r}"
        super().__init__(f"{msg} in {where}" if where else msg)
        self.id = id_


class EmptyInitialSet(ModelError):
    def __init__(self):
        super().__init__("initial set is empty")


class ModelTooLarge(SSIError):
    def __init__(self, edges, cap):
        super().__init__(f"model has {edges} edges, above the cap of {cap} (set SSI_MAX_EDGES to raise it)")
        self.edges = edges
        self.cap = cap


class UnknownId(SSIError):
    def __init__(self, id_):
        super().__init__(f"unknown id {id_!r}")
        self.id = id_


class InapplicableOperation(SSIError):
    def __init__(self, state, op):
        super().__init__(f"operation {op!r} is not applicable in state {state!r}")
        self.state = state
        self.op = op


class InapplicableAt(InapplicableOperation):
    """Raised by path recording; ``path`` holds the prefix recorded so far."""

    def __init__(self, index, state, op, path=None):
        SSIError.__init__(self, f"step {index}: operation {op!r} is not applicable in state {state!r}")
        self.index = index
        self.state = state
        self.op = op
        self.path = path


class CapExceeded(SSIError):
    def __init__(self, requested, cap):
        super().__init__(f"max_steps={requested} exceeds the enumeration cap {cap}")
        self.requested = requested
        self.cap = cap


class ParseError(SSIError):
    def __init__(self, line, col, message):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class ScriptInapplicable(SSIError):
    def __init__(self, index, state, op):
        super().__init__(f"script step {index}: {op!r} not applicable in state {state!r}")
        self.index = index
        self.state = state
        self.op = op


class InteractiveAbort(SSIError):
    pass


class ReplayMismatch(SSIError):
    pass
