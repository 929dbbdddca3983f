# ktheory_router.py
import logging
from typing import Optional

import click

from models.base_models import FanDocument, JobSpec, SymbolDocument, TransferDocument
from models.specific_models import FpDocument, ResidueDocument, TransferResultDocument
from services.compactified_fans import stratum_projection
from services.core_algebra import lattice_index, vec
from services.tropical_k import (
    MonomialSymbol,
    f_spaces,
    flag_kernel_check,
    monomial_transfer,
    residue_contract,
    restrict_along_power_map,
    restrict_to_sublattice,
    symbol_factor,
    tame_residue,
)
from utils.jobs import execute, handler, load_document, output_option, require_p
from utils.serialization import cone_from_indices, fan_from_document, rational_str, rationals, symbol_entries

logger = logging.getLogger(__name__)

router = click.Group("ktheory")


@handler("fp")
def fp(job: JobSpec) -> FpDocument:
    fan = fan_from_document(load_document(job, "fan", FanDocument))
    p = require_p(job)
    _, group = f_spaces(fan, p)
    check = flag_kernel_check(fan, p).equal if job.options.get("flag_check") else None
    return FpDocument(
        p=p,
        dim=group.dim,
        pairing_basis=[rationals(b) for b in group.pairing_basis],
        flag_kernel_equal=check,
    )


def _toric_residue(doc: SymbolDocument) -> ResidueDocument:
    fan = fan_from_document(doc.fan)
    tau = cone_from_indices(doc.fan, doc.tau)
    sigma = cone_from_indices(doc.fan, doc.sigma)
    omega = MonomialSymbol(stratum_projection(fan, tau).rank, doc.degree, vec(doc.omega))
    image = residue_contract(fan, tau, sigma, omega, doc.uniformizer)
    return ResidueDocument(
        kind="toric",
        degree=image.degree,
        coordinates=rationals(image.coordinates),
        vanishes=image.is_zero,
    )


@handler("residue")
def residue(job: JobSpec) -> ResidueDocument:
    doc = load_document(job, "symbol", SymbolDocument)
    if doc.kind == "toric":
        return _toric_residue(doc)
    entries = symbol_entries(doc.entries)
    if doc.kind == "factor":
        factored = symbol_factor(entries)
        return ResidueDocument(
            kind="factor",
            degree=factored.symbol.degree,
            coordinates=rationals(factored.fp_class),
            vanishes=factored.vanishes,
        )
    if doc.power:
        entries = restrict_along_power_map(entries, doc.power)
    value = tame_residue(entries, doc.point)
    return ResidueDocument(
        kind="tame",
        degree=value.degree,
        scalar=rational_str(value.scalar) if value.degree == 0 else None,
        primes={str(q): rational_str(c) for q, c in value.primes},
        vanishes=value.is_zero,
    )


@handler("transfer")
def transfer(job: JobSpec) -> TransferResultDocument:
    doc = load_document(job, "sublattice", TransferDocument)
    if doc.restrict:
        ambient = restrict_to_sublattice(doc.basis, doc.element, doc.p)
        index = lattice_index(doc.basis, len(doc.basis))
        return TransferResultDocument(index=index, coordinates=rationals(vec(doc.element)), ambient=rationals(ambient))
    result = monomial_transfer(doc.basis, doc.element, doc.p)
    return TransferResultDocument(
        index=result.index, coordinates=rationals(result.coordinates), ambient=rationals(result.ambient)
    )


@router.command("fp")
@click.option("--fan", "fan", type=click.Path(allow_dash=True))
@click.option("-p", "p", type=int, default=None)
@click.option("--flag-check", is_flag=True, help="Also compare with the kernel cut out by maximal-height flags.")
@output_option
def fp_command(fan: Optional[str], p: Optional[int], flag_check: bool, output: str):
    """Dimension and pairing basis of F^p of a fan."""
    inputs = {"fan": fan} if fan else {}
    execute(JobSpec(subcommand="fp", inputs=inputs, p=p, options={"flag_check": flag_check}), output)


@router.command("residue")
@click.argument("symbol", type=click.Path(allow_dash=True))
@output_option
def residue_command(symbol: str, output: str):
    """Residue (tame or toric) or F^p factorization of a symbol document."""
    execute(JobSpec(subcommand="residue", inputs={"symbol": symbol}), output)


@router.command("transfer")
@click.argument("sublattice", type=click.Path(allow_dash=True))
@output_option
def transfer_command(sublattice: str, output: str):
    """Transfer (or restriction) along a finite-index sublattice of characters."""
    execute(JobSpec(subcommand="transfer", inputs={"sublattice": sublattice}), output)
