class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateEncodingError(ArithmeticError):
    """Encoder produced an all-zero vector, so power normalization is undefined."""


class TrainingDivergedError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(ValueError):
    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key={key}")
        if line is not None:
            where.append(f"line={line}")
        prefix = (" ".join(where) + ": ") if where else ""
        super().__init__(prefix + message)
