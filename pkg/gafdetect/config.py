import logging
import os

from .errors import InvalidInput

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "GAFDETECT_SEED"
DEFAULT_SEED = 7


def default_seed() -> int:
    """
    The seed used when none is given: `GAFDETECT_SEED` if set, 7 otherwise.

    Raises:
        InvalidInput: If the environment variable is not an integer.
    """
    value = os.environ.get(SEED_ENV_VAR)
    if value is None or value.strip() == "":
        return DEFAULT_SEED
    try:
        seed = int(value)
    except ValueError as e:
        raise InvalidInput(f"{SEED_ENV_VAR} must be an integer, got {value!r}") from e
    logger.debug("Using seed %d from %s", seed, SEED_ENV_VAR)
    return seed


def check_positive(owner: str, **values) -> None:
    """Raise `InvalidInput` naming the first of `values` that is not strictly positive."""
    for name, value in values.items():
        if not value > 0:
            raise InvalidInput(f"{owner}.{name} must be positive, got {value!r}")
