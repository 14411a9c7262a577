import logging
from typing import Generic, Optional, Sequence, Tuple, TypeVar

import numpy as np

from core.base_repository import BaseRepository
from core.crn.parser import NetworkDocument, load_network
from core.exceptions import ValidationException
from models import Network

T = TypeVar('T')

logger = logging.getLogger(__name__)


class BaseService(Generic[T]):
    def __init__(self, repository: BaseRepository[T]):
        self.repository = repository

    def parse(self, text: str) -> Tuple[Network, NetworkDocument]:
        """Parse network text and build its matrices"""
        net, document = load_network(text)
        logger.debug(f"Loaded network {net.name or ''}: n={net.n}, r={net.r}, c={net.c}")
        return net, document

    def load(self, path) -> Tuple[Network, NetworkDocument]:
        """Read a .crn file through the repository and parse it"""
        return self.parse(self.repository.read_text(path))

    @staticmethod
    def state(net: Network, values: Optional[Sequence[float]], label: str) -> Optional[np.ndarray]:
        if values is None:
            return None
        x = np.asarray(values, dtype=float)
        if x.shape != (net.n,):
            raise ValidationException(f"{label} must have {net.n} entries, got {x.size}")
        return x

    @staticmethod
    def species_indices(net: Network, names: Optional[Sequence[str]]) -> Optional[list]:
        if names is None:
            return None
        return [net.species_index(name) for name in names]
