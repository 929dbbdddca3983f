# valuation_router.py
from typing import Optional

import click

from models.base_models import FlagDocument, JobSpec
from models.specific_models import HeightDocument, ValueGroupDocument
from services.higher_rank_trop import flag_height
from services.valuations import hahn_reduce, height
from utils.jobs import depth_option, execute, handler, load_document, output_option
from utils.serialization import flag_from_document, rationals, valuation_from_document

router = click.Group("valuations")


@handler("val-height")
def val_height(job: JobSpec) -> HeightDocument:
    doc = load_document(job, "valuation", FlagDocument)
    result = height(valuation_from_document(doc).value_group())
    # cross-check against the canonical flag length
    flag_height(flag_from_document(doc))
    return HeightDocument(height=result.height, rational_rank=result.rational_rank, cuts=list(result.chain.cuts))


@handler("val-reduce")
def val_reduce(job: JobSpec) -> ValueGroupDocument:
    doc = load_document(job, "valuation", FlagDocument)
    reduced = hahn_reduce(valuation_from_document(doc).value_group())
    return ValueGroupDocument(
        levels=reduced.levels,
        basis=list(reduced.basis.names),
        generators=[[rationals(x.coefficients) for x in g] for g in reduced.generators],
    )


@router.command("val-height")
@click.option("--valuation", type=click.Path(allow_dash=True))
@depth_option
@output_option
def val_height_command(valuation: Optional[str], depth: Optional[int], output: str):
    """Height, rational rank and convex chain of a monomial valuation's value group."""
    inputs = {"valuation": valuation} if valuation else {}
    execute(JobSpec(subcommand="val-height", inputs=inputs, depth=depth), output)


@router.command("val-reduce")
@click.option("--valuation", type=click.Path(allow_dash=True))
@depth_option
@output_option
def val_reduce_command(valuation: Optional[str], depth: Optional[int], output: str):
    """Order-isomorphic copy of the value group with one level per convex jump."""
    inputs = {"valuation": valuation} if valuation else {}
    execute(JobSpec(subcommand="val-reduce", inputs=inputs, depth=depth), output)
