"""Exception types shared across the package."""


class DataError(Exception):
    """Base class for anything wrong with input data."""


class ParseError(DataError):
    """A file or record could not be parsed."""


class ChemistryError(DataError):
    """A SMILES string could not be interpreted."""

    def __init__(self, message: str, smiles: str | None = None):
        self.smiles = smiles
        if smiles is not None:
            message = f"{message} (smiles={smiles!r})"
        super().__init__(message)


class IntegrityError(DataError):
    """Cross-record consistency violated (conflicting labels, missing atoms, ...)."""


class TrainingDivergedError(RuntimeError):
    """Optimization produced a non-finite loss."""
