"""
Command line entry point.

    python cli.py info networks/example6.crn
    python cli.py reconstruct networks/example2.crn --out out/example2.json
    python cli.py reconstruct networks/ --out out/
    python cli.py simulate networks/example2.crn --target both --out out/
    python cli.py verify networks/example1_published.json

Exit codes: 0 on success or a stable verdict, 2 on an inconclusive verdict,
1 on any error.
"""
import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError

from core.crn.reconstruct import VERDICT_STABLE
from core.exceptions import BaseAppException
from di.container import Container
from settings import settings

logger = logging.getLogger("crn")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2

COMMANDS = ("info", "conserved", "equilibrium", "reconstruct", "simulate", "verify")
DEFAULT_FORMAT = {"reconstruct": "json", "simulate": "csv"}


class RunConfig(BaseModel):
    """One invocation: settings overridden by command line flags"""
    command: Literal["info", "conserved", "equilibrium", "reconstruct", "simulate", "verify"]
    path: str
    epsilon: float = Field(settings.epsilon, gt=0, lt=1)
    radius: int = Field(settings.radius, ge=1)
    q_target: Optional[int] = Field(settings.q_target, ge=0)
    x0: Optional[List[float]] = None
    t_end: float = Field(settings.t_end, gt=0)
    dt: float = Field(settings.dt, gt=0)
    adaptive: bool = False
    target: Literal["original", "reverse", "both"] = "original"
    format: Literal["text", "json", "csv"] = "text"
    out: Optional[str] = None
    complexes: List[str] = Field(default_factory=list)
    nonfree: Optional[List[str]] = None
    network: Optional[str] = None
    seed: int = settings.seed
    verbose: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        values = {k: v for k, v in vars(args).items() if v is not None}
        values.setdefault("format", DEFAULT_FORMAT.get(args.command, "text"))
        return cls(**values)


def _floats(text: str) -> List[float]:
    body = text.strip().strip("()")
    try:
        return [float(part) for part in body.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _names(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crn",
        description="Stability certificates for mass action systems via complex balanced reconstructions.",
    )
    parser.add_argument("command", choices=COMMANDS, help="Pipeline step to run")
    parser.add_argument("path", help="A .crn file, a directory of them (reconstruct), or a certificate (verify)")
    parser.add_argument("--epsilon", type=float, dest="epsilon", help="Lower bound on D1 entries, in (0, 1)")
    parser.add_argument("--radius", type=int, dest="radius", help="Candidate complex radius, at least 1")
    parser.add_argument("--q", type=int, dest="q_target", help="Number of conservation laws to use")
    parser.add_argument("--x0", type=_floats, dest="x0", help="Initial state, e.g. 1.2,0.8")
    parser.add_argument("--t-end", type=float, dest="t_end", help="Integration horizon")
    parser.add_argument("--dt", type=float, dest="dt", help="Step size (RK4) or sampling interval (adaptive)")
    parser.add_argument("--adaptive", action="store_true", default=None, help="Use the adaptive RK45 integrator")
    parser.add_argument("--target", choices=("original", "reverse", "both"), help="What to simulate")
    parser.add_argument("--format", choices=("text", "json", "csv"), dest="format", help="Output format")
    parser.add_argument("--out", dest="out", help="Output file, or directory for batch and CSV output")
    parser.add_argument("--complex", action="append", dest="complexes", help="Extra candidate complex (repeatable)")
    parser.add_argument("--nonfree", type=_names, dest="nonfree", help="Non-free species, e.g. X2,X3")
    parser.add_argument("--network", dest="network", help="Network to verify a certificate against")
    parser.add_argument("--seed", type=int, dest="seed", help="Seed for randomized checks")
    parser.add_argument("--verbose", "-v", action="store_true", default=None, help="Debug logging")
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {path}")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dump(model: BaseModel) -> str:
    return model.model_dump_json(indent=2)


def _matrix(rows) -> str:
    return "\n".join("  [" + ", ".join(f"{v:.6g}" for v in row) + "]" for row in rows)


# Commands

def run_info(container: Container, config: RunConfig) -> int:
    service = container.network_service()
    report = service.info(service.repository.read_network(config.path))
    if config.format == "json":
        _emit(_dump(report), config.out)
        return EXIT_OK
    lines = [
        f"network: {report.name or config.path}",
        f"species ({report.n_species}): {', '.join(report.species)}",
        f"complexes ({report.n_complexes}): {', '.join(report.complexes)}",
        f"reactions: {report.n_reactions}",
        f"linkage classes: {report.linkage_classes}",
        f"rank: {report.rank}",
        f"deficiency: {report.deficiency}",
        f"weakly reversible: {report.weakly_reversible}",
    ]
    if report.complex_balanced is not None:
        lines.append(
            f"complex balanced at @equilibrium: {report.complex_balanced} "
            f"(residual {report.complex_balance_residual:.3e})"
        )
    _emit("\n".join(lines), config.out)
    return EXIT_OK


def run_conserved(container: Container, config: RunConfig) -> int:
    service = container.network_service()
    conserved = service.conserved(service.repository.read_network(config.path), config.q_target, config.nonfree)
    if config.format == "json":
        _emit(_dump(conserved), config.out)
        return EXIT_OK
    lines = [
        f"q = {conserved.q}",
        f"free: {', '.join(conserved.free) or '-'}",
        f"non-free: {', '.join(conserved.nonfree) or '-'}",
        "C:",
        _matrix(conserved.conserved_matrix),
        f"max |S^T C| = {conserved.kernel_residual:.3e}",
        f"||C_r^-T C_l^T||_2 = {conserved.elimination_norm:.6g}",
    ]
    _emit("\n".join(lines), config.out)
    return EXIT_OK


def run_equilibrium(container: Container, config: RunConfig) -> int:
    service = container.network_service()
    result = service.equilibrium(service.repository.read_network(config.path), config.x0)
    if config.format == "json":
        _emit(_dump(result), config.out)
        return EXIT_OK
    lines = [f"{name} = {value:.12g}" for name, value in zip(result.species, result.equilibrium)]
    lines.append(f"residual = {result.residual:.3e}")
    _emit("\n".join(lines), config.out)
    return EXIT_OK


def _certificate_summary(certificate) -> str:
    lines = [f"network: {certificate.name or '-'}", f"verdict: {certificate.verdict}"]
    if certificate.hint:
        lines.append(f"hint: {certificate.hint}")
    lines.append(f"equilibrium: {', '.join(f'{v:.10g}' for v in certificate.equilibrium)}")
    lines.append(f"non-free: {', '.join(certificate.nonfree) or '-'}")
    if certificate.D is not None:
        lines += ["D:", _matrix(certificate.D)]
    if certificate.reconstruction is not None:
        lines.append("reconstruction:")
        lines += [f"  {r.reactant} -> {r.product} ; k = {r.rate:.10g}" for r in certificate.reconstruction.reactions]
    if certificate.residuals is not None:
        lines.append("residuals: " + ", ".join(
            f"{k}={v:.3e}" for k, v in certificate.residuals.model_dump().items() if v is not None
        ))
    if certificate.flags is not None:
        lines.append("flags: " + ", ".join(f"{k}={v}" for k, v in certificate.flags.model_dump().items()))
    return "\n".join(lines)


def _verdict_code(verdict: str) -> int:
    return EXIT_OK if verdict == VERDICT_STABLE else EXIT_INCONCLUSIVE


def _certify_options(config: RunConfig) -> dict:
    return dict(
        epsilon=config.epsilon,
        radius=config.radius,
        q_target=config.q_target,
        nonfree=config.nonfree,
        extra_complexes=config.complexes,
    )


def _certify_one(path: str, config: RunConfig) -> Tuple[str, str, int]:
    """Batch worker: certify one file, write its certificate, report (file, verdict, exit code)"""
    container = Container()
    service = container.certificate_service()
    try:
        certificate = service.certify_file(path, **_certify_options(config))
    except BaseAppException as exc:
        return path, f"error: {exc}", exc.exit_code
    if config.out:
        service.save(Path(config.out) / f"{Path(path).stem}.json", certificate)
    return path, certificate.verdict, _verdict_code(certificate.verdict)


def _batch_code(codes: List[int]) -> int:
    if EXIT_ERROR in codes:
        return EXIT_ERROR
    if EXIT_INCONCLUSIVE in codes:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def run_reconstruct(container: Container, config: RunConfig) -> int:
    service = container.certificate_service()
    target = Path(config.path)
    if target.is_dir():
        files = [str(p) for p in service.repository.list_networks(target)]
        if not files:
            logger.warning(f"No .crn files in {target}")
            return EXIT_OK
        logger.info(f"Certifying {len(files)} networks")
        with ProcessPoolExecutor() as pool:
            results = list(pool.map(_certify_one, files, [config] * len(files)))
        width = max(len(Path(p).name) for p, _, _ in results)
        _emit("\n".join(f"{Path(p).name:<{width}}  {verdict}" for p, verdict, _ in results), None)
        return _batch_code([code for _, _, code in results])

    certificate = service.certify_file(config.path, **_certify_options(config))
    if config.format == "json":
        _emit(_dump(certificate), config.out)
    else:
        _emit(_certificate_summary(certificate), config.out)
    return _verdict_code(certificate.verdict)


def run_simulate(container: Container, config: RunConfig) -> int:
    service = container.simulation_service()
    run = service.simulate(
        service.repository.read_network(config.path),
        x0=config.x0,
        t_end=config.t_end,
        dt=config.dt,
        adaptive=config.adaptive,
        target=config.target,
        epsilon=config.epsilon,
        radius=config.radius,
        q_target=config.q_target,
    )
    if config.format == "json":
        _emit(_dump(service.to_read(run)), config.out)
        return EXIT_OK
    header = [f"# basin_hint: {str(run.basin_hint).lower()}"]
    if run.equivalence_gap is not None:
        header.append(f"# equivalence_gap: {run.equivalence_gap:.3e}")
    if run.descent is not None:
        header.append(f"# descent: max dG/dt = {run.descent.max_derivative:.3e}, passes = {run.descent.passes()}")
    if config.format == "text":
        lines = [line[2:] for line in header]
        for label, trajectory in run.trajectories.items():
            final = ", ".join(f"{v:.10g}" for v in trajectory.final_state)
            lines.append(f"{label}: {len(trajectory)} samples, x(t_end) = ({final})")
        _emit("\n".join(lines), config.out)
        return EXIT_OK
    if config.out:
        for label, path in service.export(run, config.out, Path(config.path).stem).items():
            logger.info(f"Wrote {label} trajectory to {path}")
        sys.stdout.write("\n".join(header) + "\n")
        return EXIT_OK
    for label, trajectory in run.trajectories.items():
        sys.stdout.write("\n".join(header + [f"# trajectory: {label}"]) + "\n")
        sys.stdout.write(trajectory.to_csv())
    return EXIT_OK


def run_verify(container: Container, config: RunConfig) -> int:
    service = container.certificate_service()
    certificate = service.repository.load_certificate(config.path)
    text = service.repository.read_network(config.network) if config.network else None
    verification = service.verify(certificate, text)
    if config.format == "json":
        _emit(_dump(verification), config.out)
        return _verdict_code(verification.verdict)
    lines = [f"certificate: {certificate.name or config.path}", f"verdict: {verification.verdict}"]
    lines += [f"  {k}: {v:.3e}" for k, v in verification.residuals.model_dump().items() if v is not None]
    lines.append(f"  kernel: {verification.kernel_residual:.3e}")
    if verification.D_mismatch is not None:
        lines.append(f"  D mismatch: {verification.D_mismatch:.3e}")
    for m in verification.mismatches:
        lines.append(
            f"  d/dt {m.species}, {m.monomial}: expected {m.expected:.6g}, got {m.actual:.6g} "
            f"(off by {m.difference:.3e})"
        )
    _emit("\n".join(lines), config.out)
    return _verdict_code(verification.verdict)


RUNNERS = {
    "info": run_info,
    "conserved": run_conserved,
    "equilibrium": run_equilibrium,
    "reconstruct": run_reconstruct,
    "simulate": run_simulate,
    "verify": run_verify,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.from_args(args)
    except ValidationError as exc:
        sys.stderr.write(f"error: invalid arguments\n{exc}\n")
        return EXIT_ERROR

    logging.basicConfig(
        level=logging.DEBUG if config.verbose else settings.log_level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    container = Container()
    try:
        return RUNNERS[config.command](container, config)
    except BaseAppException as exc:
        logger.debug("Pipeline failed", exc_info=True)
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
