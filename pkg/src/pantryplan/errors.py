"""Exception types shared across the package."""


class PantryError(Exception):
    """Base class for all pantryplan errors."""


class ParseError(PantryError):
    """Malformed input data; names the offending row and field."""

    def __init__(self, message: str, row: int | None = None, field: str | None = None):
        self.row = row
        self.field = field
        where = []
        if row is not None:
            where.append(f"row {row}")
        if field is not None:
            where.append(f"field '{field}'")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class RegistryError(PantryError):
    """Unknown tag, nutrient, or condition code."""


class MissingPriceError(PantryError):
    """No usable price quote for one or more items."""

    def __init__(self, item_ids):
        self.item_ids = sorted(item_ids)
        super().__init__(f"no price available for items: {', '.join(self.item_ids)}")


class UnknownItemError(PantryError, KeyError):
    """Lookup of an item id that is not present."""


class BudgetError(PantryError):
    """Disposable income is non-positive; no food budget can be computed."""


class TableCoverageError(PantryError):
    """A household member falls outside every demographic bucket."""


class DataError(PantryError):
    """Invalid numeric data, e.g. a non-positive previous price."""


class ConfigError(PantryError):
    """Invalid scenario or model configuration."""


class DimensionError(PantryError, ValueError):
    """LP rows or vectors with inconsistent lengths: a caller contract violation."""


class ContractViolation(PantryError, ValueError):
    """An operation was invoked outside its stated preconditions."""


class SolverStalledError(PantryError):
    """Simplex exceeded its iteration cap; distinct from infeasibility."""

    def __init__(self, iterations: int):
        self.iterations = iterations
        super().__init__(f"simplex did not converge within {iterations} iterations")


class InfeasiblePlanError(PantryError):
    """Planning LP has no feasible point; carries the diagnosis."""

    def __init__(self, diagnosis):
        self.diagnosis = diagnosis
        super().__init__(f"plan infeasible: {diagnosis.kind}")
