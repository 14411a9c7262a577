# repositories/network/network_repository.py

from pathlib import Path
from typing import List

from core.base_repository import BaseRepository, PathLike
from core.crn.dynamics import Trajectory
from services.certificate.certificate_service_dto import Certificate


class NetworkRepository(BaseRepository[Certificate]):
    """.crn network files, certificate JSON and trajectory CSV"""

    def __init__(self, base_dir: PathLike = "networks"):
        super().__init__(base_dir)
        self._model_type = Certificate

    def read_network(self, path: PathLike) -> str:
        return self.read_text(path)

    def list_networks(self, directory: PathLike) -> List[Path]:
        return self.list_files(directory, "*.crn")

    def load_certificate(self, path: PathLike) -> Certificate:
        return self.load(path)

    def save_certificate(self, path: PathLike, certificate: Certificate) -> Path:
        return self.save(path, certificate)

    def save_trajectory(self, path: PathLike, trajectory: Trajectory) -> Path:
        return self.write_text(path, trajectory.to_csv())
