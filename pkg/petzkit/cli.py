"""Command line front end.

Usage::

    petzkit info CHANNEL
    petzkit audit CHANNEL ENSEMBLE
    petzkit construct CHANNEL ENSEMBLE [--rank R] [--output FILE]
    petzkit capacity CHANNEL [--state STATE | --hamiltonian H --bound h]
    petzkit mutinfo CHANNEL STATE
    petzkit demo {trine,bell-partial-trace,dephasing-equality,strict-concavity}

Every command accepts ``--format text|json``, ``--seed``, ``-v/-vv`` and one
``--tol-<name>`` flag per field of :class:`~petzkit.config.Tolerances`.

Exit codes: 0 success, 1 a checked (in)equality failed, 2 invalid input,
3 an optimizer did not converge or two formulas disagreed.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable

import numpy as np

from . import __version__, io
from .capacity import (
    CapacityOptions,
    CapacityResult,
    EnergyConstraint,
    constrained_holevo,
    energy_constrained_capacities,
    holevo_capacity,
    min_output_entropy,
)
from .channels import (
    Ensemble,
    KrausChannel,
    complementary,
    dephasing,
    minimal_kraus,
    partial_trace_channel,
    trine,
    trine_vectors,
)
from .config import DEFAULT_TOLERANCES, Tolerances
from .entropy import (
    coherent_info,
    cond_entropy,
    entropy_gain,
    holevo,
    holevo_image,
    mutual_info,
    vn_entropy,
)
from .exceptions import ConstructionError, PetzkitError
from .matcore import eig_hermitian
from .petz import peb_upper_certificate, rank_bounded_complement, reversibility_audit
from .sampling import random_density_matrix, random_pure_decomposition

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_NOT_CONVERGED = 3

SEED_VARIABLE = "PETZKIT_SEED"

# input angles θ of cos θ|0⟩ + sin θ|1⟩ swept in the trine demo
TRINE_GRID = 512
TRINE_MIN_SECOND_EIGENVALUE = 1 / 6


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs besides its positional inputs.

    Attributes:
        command:
            Subcommand name.
        paths:
            Input and output files by argument name.
        tolerances:
            Thresholds, defaults overridden by ``--tol-*`` flags.
        seed:
            Seed of all randomized steps.
        output_format:
            ``"text"`` or ``"json"``.
    """

    command: str
    paths: dict[str, str]
    tolerances: Tolerances
    seed: int
    output_format: str


@dataclass
class Outcome:
    """What a command prints and its verdict."""

    payload: dict[str, Any]
    exit_code: int = EXIT_OK


def _default_seed() -> int:
    value = os.environ.get(SEED_VARIABLE, "0")
    try:
        return int(value)
    except ValueError:
        logger.warning("Ignoring non-integer %s=%r", SEED_VARIABLE, value)
        return 0


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format",
        dest="output_format",
        choices=["text", "json"],
        default="text",
        help="Output format (default: text)",
    )
    common.add_argument(
        "--seed",
        type=int,
        default=_default_seed(),
        help=f"Seed of randomized steps (default: ${SEED_VARIABLE} or 0)",
    )
    common.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log progress to stderr; repeat for debug output",
    )
    thresholds = common.add_argument_group("tolerances")
    for field in dataclasses.fields(Tolerances):
        thresholds.add_argument(
            f"--tol-{field.name.replace('_', '-')}",
            dest=f"tol_{field.name}",
            type=float,
            default=None,
            metavar="X",
            help=f"default: {getattr(DEFAULT_TOLERANCES, field.name):g}",
        )
    return common


def _optimizer_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("optimizer")
    group.add_argument("--restarts", type=int, default=16)
    group.add_argument("--max-iterations", type=int, default=1000)
    group.add_argument("--opt-tol", type=float, default=1e-8)
    group.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    """The ``petzkit`` argument parser."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="petzkit",
        description="Petz recovery, reversibility and capacities of channels.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    info = commands.add_parser(
        "info", parents=[common], help="Dimensions and Kraus ranks of a channel"
    )
    info.add_argument("channel")

    audit = commands.add_parser(
        "audit", parents=[common], help="Reversibility of a channel on an ensemble"
    )
    audit.add_argument("channel")
    audit.add_argument("ensemble")

    construct = commands.add_parser(
        "construct",
        parents=[common],
        help="Rank-bounded Kraus representation of the complementary channel",
    )
    construct.add_argument("channel")
    construct.add_argument("ensemble")
    construct.add_argument("--rank", type=int, default=1)
    construct.add_argument("--output", help="Write the constructed channel here")

    capacity = commands.add_parser(
        "capacity", parents=[common], help="Holevo-type capacities"
    )
    capacity.add_argument("channel")
    capacity.add_argument("--state", help="Fix the average input state")
    capacity.add_argument("--hamiltonian", help="Energy operator H")
    capacity.add_argument("--bound", type=float, help="Energy bound h")
    _optimizer_arguments(capacity)

    mutinfo = commands.add_parser(
        "mutinfo", parents=[common], help="Entropic quantities of one input state"
    )
    mutinfo.add_argument("channel")
    mutinfo.add_argument("state")

    demo = commands.add_parser("demo", parents=[common], help="Scripted scenarios")
    demo.add_argument("name", choices=sorted(DEMOS))
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    overrides = {
        field.name: getattr(args, f"tol_{field.name}")
        for field in dataclasses.fields(Tolerances)
        if getattr(args, f"tol_{field.name}") is not None
    }
    paths = {
        name: value
        for name in ("channel", "ensemble", "state", "hamiltonian", "output")
        if isinstance(value := getattr(args, name, None), str)
    }
    return RunConfig(
        command=args.command,
        paths=paths,
        tolerances=DEFAULT_TOLERANCES.replace(**overrides),
        seed=args.seed,
        output_format=args.output_format,
    )


def _options(args: argparse.Namespace, config: RunConfig) -> CapacityOptions:
    return CapacityOptions(
        tol=args.opt_tol,
        restarts=args.restarts,
        max_iterations=args.max_iterations,
        seed=config.seed,
        n_workers=args.workers,
    )


def _load_channel(config: RunConfig) -> KrausChannel:
    return io.load_channel(config.paths["channel"], config.tolerances)


def _convergence(*results: CapacityResult) -> int:
    return EXIT_OK if all(r.converged for r in results) else EXIT_NOT_CONVERGED


def cmd_info(args: argparse.Namespace, config: RunConfig) -> Outcome:
    """Dimensions, minimal Kraus count and ranks, ``r``-PEB certificates."""
    channel = _load_channel(config)
    minimal = minimal_kraus(channel, config.tolerances)
    ranks = minimal.kraus_ranks(config.tolerances.numerical_rank)
    certificates = {
        str(r): peb_upper_certificate(channel, r)
        for r in range(1, min(channel.dim_in, channel.dim_out) + 1)
    }
    return Outcome(
        {
            "dim_in": channel.dim_in,
            "dim_out": channel.dim_out,
            "kraus_count": channel.n_kraus,
            "minimal_kraus_count": minimal.n_kraus,
            "minimal_kraus_ranks": ranks,
            "peb_certificate": certificates,
        }
    )


def cmd_audit(args: argparse.Namespace, config: RunConfig) -> Outcome:
    """Holevo gap and Petz recovery residuals of a channel on an ensemble."""
    channel = _load_channel(config)
    ens = io.load_ensemble(config.paths["ensemble"])
    report = reversibility_audit(channel, ens, config.tolerances)
    return Outcome(report.as_dict())


def cmd_construct(args: argparse.Namespace, config: RunConfig) -> Outcome:
    """Emit a rank-bounded Kraus representation of the complementary channel."""
    channel = _load_channel(config)
    ens = io.load_ensemble(config.paths["ensemble"])
    construction = rank_bounded_complement(channel, ens, args.rank, config.tolerances)
    if "output" in config.paths:
        io.dump_channel(construction.channel, config.paths["output"])
        logger.info("Wrote %r to %s", construction.channel, config.paths["output"])
    return Outcome(
        {
            "rank": args.rank,
            "per_op_numerical_rank": list(construction.per_op_numerical_rank),
            "certified_rank_bound": construction.certified_rank_bound,
            "labels": [list(label) for label in construction.labels],
            "precondition_residual": construction.precondition_residual,
            "completeness": construction.completeness,
            "choi_residual": construction.choi_residual,
            "restricted": construction.isometry is not None,
            "channel": io.channel_to_dict(construction.channel),
        }
    )


def cmd_capacity(args: argparse.Namespace, config: RunConfig) -> Outcome:
    """Holevo capacity, or its constrained variants."""
    channel = _load_channel(config)
    opts = _options(args, config)
    if "state" in config.paths:
        rho = io.load_state(config.paths["state"])
        result = constrained_holevo(channel, rho, opts)
        return Outcome(
            {
                "constrained_holevo": result.as_dict(),
                "mutual_information": mutual_info(channel, rho).value,
            },
            _convergence(result),
        )
    if "hamiltonian" in config.paths or args.bound is not None:
        if "hamiltonian" not in config.paths or args.bound is None:
            raise ValueError("--hamiltonian and --bound must be given together")
        constraint = EnergyConstraint(
            io.load_hamiltonian(config.paths["hamiltonian"]), args.bound
        )
        capacities = energy_constrained_capacities(channel, constraint, opts)
        diagnostic = capacities.diagnostic
        return Outcome(
            {
                "holevo": capacities.holevo.as_dict(),
                "entanglement_assisted": capacities.entanglement_assisted.as_dict(),
                "diagnostic": None if diagnostic is None else diagnostic.as_dict(),
            },
            _convergence(capacities.holevo, capacities.entanglement_assisted),
        )
    result = holevo_capacity(channel, opts)
    minimum = min_output_entropy(channel, opts)
    return Outcome(
        {"holevo": result.as_dict(), "min_output_entropy": minimum.as_dict()},
        _convergence(result, minimum),
    )


def cmd_mutinfo(args: argparse.Namespace, config: RunConfig) -> Outcome:
    """Input, output and environment entropies and the derived informations."""
    channel = _load_channel(config)
    rho = io.load_state(config.paths["state"])
    return Outcome(
        {
            "input_entropy": vn_entropy(rho).value,
            "output_entropy": vn_entropy(channel.apply(rho)).value,
            "environment_entropy": vn_entropy(complementary(channel).apply(rho)).value,
            "mutual_information": mutual_info(channel, rho).value,
            "coherent_information": coherent_info(channel, rho).value,
            "entropy_gain": entropy_gain(channel, rho).value,
        }
    )


def _checked(payload: dict[str, Any], **checks: bool) -> Outcome:
    payload["checks"] = checks
    failed = [name for name, passed in checks.items() if not passed]
    if failed:
        logger.error("Failed checks: %s", ", ".join(failed))
        return Outcome(payload, EXIT_CHECK_FAILED)
    return Outcome(payload)


def demo_trine(config: RunConfig) -> Outcome:
    """The trine channel preserves the Holevo quantity of no full-rank ensemble.

    Every output has rank at least two, so no pure ensemble can be recovered.
    """
    channel = trine()
    ens = Ensemble.from_vectors(np.full(3, 1 / 3), list(trine_vectors()))
    report = reversibility_audit(channel, ens, config.tolerances)
    angles = np.linspace(0, np.pi, TRINE_GRID, endpoint=False)
    second = min(
        float(eig_hermitian(channel.apply_matrix(np.outer(v, v)))[0][-2])
        for v in np.stack([np.cos(angles), np.sin(angles)], axis=1)
    )
    return _checked(
        {"audit": report.as_dict(), "min_second_eigenvalue": second},
        positive_gap=report.gap > config.tolerances.gap,
        not_reversible=not report.reversible,
        second_eigenvalue=abs(second - TRINE_MIN_SECOND_EIGENVALUE) <= 1e-6,
    )


def demo_bell_partial_trace(config: RunConfig) -> Outcome:
    """Tracing out half of the four Bell states destroys two bits."""
    channel = partial_trace_channel(2, 2)
    s = 1 / np.sqrt(2)
    bell = [
        [s, 0, 0, s],
        [s, 0, 0, -s],
        [0, s, s, 0],
        [0, s, -s, 0],
    ]
    ens = Ensemble.from_vectors(np.full(4, 1 / 4), bell)
    report = reversibility_audit(channel, ens, config.tolerances)
    chi_in = float(report.chi_in)
    chi_out = float(report.chi_out)
    return _checked(
        {"audit": report.as_dict()},
        chi_in=abs(chi_in - 2.0) <= 1e-10,
        chi_out=abs(chi_out) <= 1e-10,
    )


def demo_dephasing_equality(config: RunConfig) -> Outcome:
    """Dephasing keeps the basis ensemble intact; its complement is rank one."""
    channel = dephasing(2)
    ens = Ensemble.from_vectors([0.5, 0.5], list(np.eye(2)))
    report = reversibility_audit(channel, ens, config.tolerances)
    construction = rank_bounded_complement(channel, ens, 1, config.tolerances)
    ranks = list(construction.per_op_numerical_rank)
    return _checked(
        {
            "audit": report.as_dict(),
            "ranks": ranks,
            "complement": io.channel_to_dict(construction.channel),
        },
        zero_gap=abs(report.gap) <= 1e-10,
        recovered=report.max_residual <= 1e-9,
        rank_one=all(rank == 1 for rank in ranks),
    )


def demo_strict_concavity(config: RunConfig) -> Outcome:
    """Strict concavity of ``H(A|B)`` and strict loss under a partial trace.

    A random full-rank state on ``2 ⊗ 2`` is split into pure states; its
    conditional entropy exceeds their average, and tracing out the second
    factor lowers the Holevo quantity of the split.
    """
    rng = np.random.default_rng(config.seed)
    rho = random_density_matrix(4, rng=rng)
    ens = random_pure_decomposition(rho, 6, rng)
    whole = float(cond_entropy(rho, (2, 2)))
    parts = sum(p * float(cond_entropy(state, (2, 2))) for p, state in ens)
    chi_in = float(holevo(ens))
    chi_out = float(holevo_image(partial_trace_channel(2, 2), ens))
    return _checked(
        {
            "conditional_entropy": whole,
            "average_conditional_entropy": parts,
            "concavity_margin": whole - parts,
            "chi_in": chi_in,
            "chi_out": chi_out,
            "gap": chi_in - chi_out,
        },
        strictly_concave=whole - parts > config.tolerances.gap,
        strict_decrease=chi_in - chi_out > config.tolerances.gap,
    )


DEMOS: dict[str, Callable[[RunConfig], Outcome]] = {
    "trine": demo_trine,
    "bell-partial-trace": demo_bell_partial_trace,
    "dephasing-equality": demo_dephasing_equality,
    "strict-concavity": demo_strict_concavity,
}


def cmd_demo(args: argparse.Namespace, config: RunConfig) -> Outcome:
    """Run a named scenario and check its (in)equalities."""
    return DEMOS[args.name](config)


COMMANDS: dict[str, Callable[[argparse.Namespace, RunConfig], Outcome]] = {
    "info": cmd_info,
    "audit": cmd_audit,
    "construct": cmd_construct,
    "capacity": cmd_capacity,
    "mutinfo": cmd_mutinfo,
    "demo": cmd_demo,
}


def _text(payload: dict[str, Any], indent: int = 0) -> list[str]:
    lines = []
    pad = "  " * indent
    for key, value in payload.items():
        if isinstance(value, dict) and key != "channel" and key != "complement":
            lines.append(f"{pad}{key}:")
            lines.extend(_text(value, indent + 1))
        elif isinstance(value, dict):
            lines.append(f"{pad}{key}: <{len(value['kraus'])} Kraus operators>")
        elif isinstance(value, bool):
            lines.append(f"{pad}{key}: {str(value).lower()}")
        elif isinstance(value, float):
            lines.append(f"{pad}{key}: {value:.9g}")
        elif isinstance(value, list) and value and isinstance(value[0], float):
            lines.append(f"{pad}{key}: [{', '.join(f'{v:.6g}' for v in value)}]")
        else:
            lines.append(f"{pad}{key}: {value}")
    return lines


def render(payload: dict[str, Any], output_format: str) -> str:
    """Text or JSON rendering of a command's payload."""
    if output_format == "json":
        return io.dumps(payload)
    return "\n".join(_text(payload)) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the ``petzkit`` console script."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = _run_config(args)
        outcome = COMMANDS[args.command](args, config)
    except ConstructionError as e:
        print(f"petzkit: construction failed: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except (ValueError, OSError) as e:
        print(f"petzkit: error: {e}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except PetzkitError as e:
        print(f"petzkit: numerical failure: {e}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    sys.stdout.write(render(outcome.payload, config.output_format))
    if outcome.exit_code == EXIT_NOT_CONVERGED:
        logger.warning("An optimizer stopped before reaching its tolerance")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
