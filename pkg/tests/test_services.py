import pytest

from conftest import NETWORK_DIR, read_network_text
from core.crn.reconstruct import VERDICT_INCONCLUSIVE, VERDICT_STABLE
from core.exceptions import NotFoundException, ParseException, PreconditionException, ValidationException
from repositories.network.network_repository import NetworkRepository
from services.certificate.certificate_service import CertificateService
from services.certificate.certificate_service_dto import Certificate
from services.network.network_service import NetworkService
from services.simulation.simulation_service import SimulationService

EPSILON = 1e-3

UNSTABLE = """
@name = unstable
@species = X1
@equilibrium = (1)
2 X1 -> 3 X1 ; k = 1
X1 -> 0 ; k = 1
"""


@pytest.fixture
def repository():
    return NetworkRepository(NETWORK_DIR)


@pytest.fixture
def network_service(repository):
    return NetworkService(repository)


@pytest.fixture
def certificate_service(repository):
    return CertificateService(repository, epsilon=EPSILON)


@pytest.fixture
def simulation_service(repository):
    return SimulationService(repository, t_end=10.0, dt=1e-3)


class TestNetworkService:
    def test_info_example6(self, network_service):
        report = network_service.info(read_network_text("example6"))
        assert report.name == "example6"
        assert report.n_species == 4
        assert report.n_complexes == 6
        assert report.linkage_classes == 3
        assert report.rank == 2
        assert report.deficiency == 1
        assert not report.weakly_reversible
        assert report.complex_balance_residual == pytest.approx(1.0)
        assert report.complex_balanced is False

    def test_info_without_equilibrium(self, network_service):
        report = network_service.info("A -> B ; k = 1\n")
        assert report.complex_balanced is None
        assert report.species == ["A", "B"]

    def test_parse_error_propagates(self, network_service):
        with pytest.raises(ParseException) as info:
            network_service.info("X1 -> X2 ; k = -1\n")
        assert info.value.stage == "parse"

    def test_conserved_example4(self, network_service):
        conserved = network_service.conserved(read_network_text("example4"))
        assert conserved.q == 2
        assert conserved.free == ["X1"]
        assert conserved.nonfree == ["X2", "X3"]
        assert conserved.kernel_residual < 1e-12
        assert all(v > 0 for row in conserved.conserved_matrix for v in row)

    def test_conserved_with_named_nonfree(self, network_service):
        conserved = network_service.conserved(read_network_text("example2"), nonfree=["X1"])
        assert conserved.free == ["X2"]
        assert conserved.permutation == ["X2", "X1"]

    def test_conserved_unknown_species(self, network_service):
        with pytest.raises(ValidationException):
            network_service.conserved(read_network_text("example2"), nonfree=["Y"])

    def test_equilibrium_example2(self, network_service):
        result = network_service.equilibrium(read_network_text("example2"))
        assert result.equilibrium == pytest.approx([1.0, 1.0], abs=1e-9)
        assert result.totals == pytest.approx([2.0], abs=1e-9)
        assert result.residual < 1e-9

    def test_equilibrium_shape_checked(self, network_service):
        with pytest.raises(ValidationException):
            network_service.equilibrium(read_network_text("example2"), x0=[1.0])


class TestCertificateService:
    def test_certify_example2(self, certificate_service):
        certificate = certificate_service.certify_text(read_network_text("example2"))
        assert certificate.verdict == VERDICT_STABLE
        assert certificate.name == "example2"
        assert certificate.nonfree == ["X2"]
        assert certificate.D == pytest.approx([[EPSILON, 0.0], [1.0, 1.0]])
        assert certificate.reconstruction.species == ["Xhat1"]
        assert certificate.objective == pytest.approx(4 * EPSILON)
        assert certificate.flags.detailed_balanced
        assert certificate.bound.constant == pytest.approx(2 ** 0.5)

    def test_certify_file(self, certificate_service):
        certificate = certificate_service.certify_file("example4.crn")
        assert certificate.verdict == VERDICT_STABLE
        assert certificate.nonfree == ["X2", "X3"]

    def test_missing_file(self, certificate_service):
        with pytest.raises(NotFoundException):
            certificate_service.certify_file("missing.crn")

    def test_unstable_network_has_no_reconstruction(self, certificate_service):
        certificate = certificate_service.certify_text(UNSTABLE)
        assert certificate.verdict == VERDICT_INCONCLUSIVE
        assert certificate.reconstruction is None
        assert certificate.D is None
        assert "larger radius" in certificate.hint

    def test_extra_complex_on_nonfree_species(self, certificate_service):
        with pytest.raises(ValidationException) as info:
            certificate_service.certify_text(read_network_text("example2"), extra_complexes=["X2"])
        assert info.value.stage == "candidates"

    def test_verify_round_trip(self, certificate_service, tmp_path):
        certificate = certificate_service.certify_text(read_network_text("example2"))
        path = certificate_service.save(tmp_path / "example2.json", certificate)
        reloaded = certificate_service.repository.load_certificate(path)
        assert isinstance(reloaded, Certificate)

        verification = certificate_service.verify(reloaded)
        assert verification.verdict == VERDICT_STABLE
        assert verification.mismatches == []
        assert verification.D_mismatch < 1e-14
        assert verification.residuals.dyn_equiv == pytest.approx(certificate.residuals.dyn_equiv, abs=1e-14)
        assert verification.flags == certificate.flags

    @pytest.mark.parametrize("name", ["example2_published.json", "example4_published.json"])
    def test_published_certificates_verify(self, certificate_service, name):
        verification = certificate_service.verify(certificate_service.repository.load_certificate(name))
        assert verification.verdict == VERDICT_STABLE
        assert verification.residuals.dyn_equiv < 1e-12
        assert verification.residuals.complex_balance < 1e-12
        assert verification.D_mismatch < 1e-12

    def test_published_example1_is_off_by_rounding(self, certificate_service):
        verification = certificate_service.verify(
            certificate_service.repository.load_certificate("example1_published.json")
        )
        assert verification.verdict == VERDICT_INCONCLUSIVE
        assert len(verification.mismatches) == 1
        mismatch = verification.mismatches[0]
        assert mismatch.species == "X1"
        assert mismatch.monomial == "X1^2"
        assert mismatch.difference == pytest.approx(0.002, abs=1e-9)
        assert verification.residuals.complex_balance == pytest.approx(0.002, abs=1e-9)

    def test_verify_against_other_network(self, certificate_service):
        certificate = certificate_service.repository.load_certificate("example2_published.json")
        with pytest.raises(ValidationException):
            certificate_service.verify(certificate, read_network_text("example4"))

    def test_verify_needs_reconstruction(self, certificate_service):
        certificate = certificate_service.repository.load_certificate("example2_published.json")
        stripped = certificate.model_copy(update={"reconstruction": None})
        with pytest.raises(ValidationException) as info:
            certificate_service.verify(stripped)
        assert info.value.stage == "verify"

    def test_invalid_certificate_file(self, certificate_service, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"network": "X1 -> X2 ; k = 1", "equilibrium": [1, 1], "conserved_matrix": [[1]]}')
        with pytest.raises(ValidationException):
            certificate_service.repository.load_certificate(path)


class TestSimulationService:
    def test_original_example1(self, simulation_service):
        run = simulation_service.simulate(read_network_text("example1"), t_end=5.0)
        assert list(run.trajectories) == ["original"]
        assert run.equilibrium == pytest.approx([1.0, 2.0], abs=1e-9)
        assert run.trajectories["original"].final_state == pytest.approx([1.0, 2.0], abs=1e-4)
        assert run.descent is None

    def test_both_example2(self, simulation_service, tmp_path):
        run = simulation_service.simulate(read_network_text("example2"), target="both")
        assert set(run.trajectories) == {"original", "reverse"}
        assert run.equivalence_gap < 1e-6
        assert run.descent.passes()
        assert run.basin_hint

        read = simulation_service.to_read(run)
        assert read.descent.passes
        assert [t.label for t in read.trajectories] == ["original", "reverse"]
        assert read.trajectories[1].species == ["Xhat1"]

        written = simulation_service.export(run, tmp_path, "example2")
        assert sorted(written) == ["original", "reverse"]
        header = (tmp_path / "example2_reverse.csv").read_text().splitlines()[0]
        assert header.startswith("t,")

    def test_original_needs_initial_state(self, simulation_service):
        with pytest.raises(ValidationException):
            simulation_service.simulate(read_network_text("example6"))

    def test_reverse_needs_reconstruction(self, simulation_service):
        with pytest.raises(PreconditionException) as info:
            simulation_service.simulate(UNSTABLE, x0=[1.2], target="reverse")
        assert info.value.stage == "simulation"

    def test_reverse_uses_requested_conservation_laws(self, simulation_service):
        with pytest.raises(PreconditionException) as info:
            simulation_service.simulate(read_network_text("example2"), t_end=0.1, target="reverse", q_target=2)
        assert info.value.stage == "conservation"

    def test_original_ignores_reconstruction_options(self, simulation_service):
        run = simulation_service.simulate(read_network_text("example2"), t_end=0.1, q_target=2)
        assert list(run.trajectories) == ["original"]
