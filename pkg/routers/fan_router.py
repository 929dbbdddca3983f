# fan_router.py
import logging
import random
from typing import Optional

import click

from models.base_models import FanDocument, FlagDocument, JobSpec, PolynomialDocument
from models.specific_models import LocateDocument, RefineDocument
from services.fans import random_stellar_refinement, refine
from services.higher_rank_trop import canonicalize, limit_point
from services.tropicalize import tropical_hypersurface
from utils.config import DEFAULT_SEED
from utils.jobs import depth_option, execute, handler, load_document, output_option, parse_vector
from utils.serialization import (
    cone_to_document,
    fan_from_document,
    fan_to_document,
    flag_from_document,
    polynomial_from_document,
    real_vector_to_document,
)

logger = logging.getLogger(__name__)

router = click.Group("fans")


@handler("hyp")
def hyp(job: JobSpec) -> FanDocument:
    f = polynomial_from_document(load_document(job, "polynomial", PolynomialDocument))
    return fan_to_document(tropical_hypersurface(f).fan)


@handler("locate")
def locate(job: JobSpec) -> LocateDocument:
    fan = fan_from_document(load_document(job, "fan", FanDocument))
    x = canonicalize(flag_from_document(load_document(job, "flag", FlagDocument)))
    cone = limit_point(x, fan)
    return LocateDocument(
        canonical_levels=[real_vector_to_document(level) for level in x.levels],
        height=x.length,
        cone=cone_to_document(cone),
        cone_dim=cone.dim,
    )


@handler("refine")
def refine_fan(job: JobSpec) -> RefineDocument:
    fan = fan_from_document(load_document(job, "fan", FanDocument))
    if "common" in job.inputs:
        other = fan_from_document(load_document(job, "common", FanDocument))
        return RefineDocument(fan=fan_to_document(refine(fan, common=other)))
    if job.options.get("ray"):
        ray = parse_vector(job.options["ray"])
        return RefineDocument(fan=fan_to_document(refine(fan, ray=ray)), steps=[ray])

    rng = random.Random(DEFAULT_SEED if job.seed is None else job.seed)
    steps = []
    for _ in range(int(job.options.get("steps", 1))):
        before = set(fan.rays)
        fan = random_stellar_refinement(fan, rng)
        steps.extend(list(r) for r in sorted(set(fan.rays) - before))
    return RefineDocument(fan=fan_to_document(fan), steps=steps)


@router.command("hyp")
@click.argument("polynomial", type=click.Path(allow_dash=True))
@output_option
def hyp_command(polynomial: str, output: str):
    """Tropical hypersurface of a polynomial document."""
    execute(JobSpec(subcommand="hyp", inputs={"polynomial": polynomial}), output)


@router.command("locate")
@click.option("--fan", "fan", type=click.Path(allow_dash=True))
@click.option("--flag", "flag", type=click.Path(allow_dash=True))
@depth_option
@output_option
def locate_command(fan: Optional[str], flag: Optional[str], depth: Optional[int], output: str):
    """Canonical form of a flag and the cone containing its limit point."""
    inputs = {k: v for k, v in {"fan": fan, "flag": flag}.items() if v}
    execute(JobSpec(subcommand="locate", inputs=inputs, depth=depth), output)


@router.command("refine")
@click.option("--fan", "fan", type=click.Path(allow_dash=True))
@click.option("--common", type=click.Path(allow_dash=True), default=None, help="Second fan for a common refinement.")
@click.option("--ray", default=None, help='Stellar subdivision ray, e.g. "1,1".')
@click.option("--steps", type=int, default=1, help="Number of random stellar subdivisions.")
@click.option("--seed", type=int, default=None)
@output_option
def refine_command(fan, common, ray, steps, seed, output):
    """Refine a fan by a common refinement, a given ray, or random stellar subdivisions."""
    inputs = {k: v for k, v in {"fan": fan, "common": common}.items() if v}
    options = {"steps": steps}
    if ray:
        options["ray"] = ray
    execute(JobSpec(subcommand="refine", inputs=inputs, seed=seed, options=options), output)
