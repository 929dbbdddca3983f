# gersten_router.py
import logging
from typing import Optional

import click

from models.base_models import FanDocument, JobSpec
from models.specific_models import ChowDocument, GerstenDocument
from services.gersten import build_complex, chow_oracle, cohomology_dims, compare
from utils.jobs import execute, handler, load_document, output_option, require_p
from utils.serialization import fan_from_document

logger = logging.getLogger(__name__)

router = click.Group("gersten")


@handler("gersten")
def gersten(job: JobSpec) -> GerstenDocument:
    fan = fan_from_document(load_document(job, "fan", FanDocument))
    cx = build_complex(fan, require_p(job))
    if not job.options.get("check_chow"):
        h = cohomology_dims(cx)
        return GerstenDocument(p=cx.p, term_dims=cx.term_dims, h=h, top_cokernel=h[-1])
    report = compare(cx, chow_oracle(fan, cx.p))
    return GerstenDocument(
        p=report.p,
        term_dims=list(report.term_dims),
        h=list(report.h),
        top_cokernel=report.top_cokernel,
        chow_oracle=report.chow_oracle,
        match=report.match,
    )


@handler("chow")
def chow(job: JobSpec) -> ChowDocument:
    fan = fan_from_document(load_document(job, "fan", FanDocument))
    result = chow_oracle(fan, require_p(job))
    return ChowDocument(p=result.p, dim=result.dim, method=result.method)


@router.command("gersten")
@click.option("--fan", "fan", type=click.Path(allow_dash=True))
@click.option("-p", "p", type=int, default=None)
@click.option("--check-chow", is_flag=True, help="Compare the top cokernel with the Chow group; exit 2 when they differ.")
@output_option
def gersten_command(fan: Optional[str], p: Optional[int], check_chow: bool, output: str):
    """Torus-invariant Gersten complex: term dimensions and cohomology."""
    inputs = {"fan": fan} if fan else {}
    execute(JobSpec(subcommand="gersten", inputs=inputs, p=p, options={"check_chow": check_chow}), output)


@router.command("chow")
@click.option("--fan", "fan", type=click.Path(allow_dash=True))
@click.option("-p", "p", type=int, default=None)
@output_option
def chow_command(fan: Optional[str], p: Optional[int], output: str):
    """Dimension of the rational Chow group CH^p of a complete toric variety."""
    inputs = {"fan": fan} if fan else {}
    execute(JobSpec(subcommand="chow", inputs=inputs, p=p), output)
