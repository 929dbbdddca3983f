# jobs.py
#
# Job execution for the CLI: handler registry, input loading, error documents
# and output emission.

import json
import logging
import os
import sys
from contextlib import contextmanager
from typing import Callable, Dict, Tuple, Type, TypeVar

import click
from pydantic import BaseModel, ValidationError

from models.base_models import JobSpec
from models.specific_models import ErrorDocument
from utils.errors import InvalidInput, TropkError

logger = logging.getLogger(__name__)

Handler = Callable[[JobSpec], BaseModel]
HANDLERS: Dict[str, Handler] = {}

M = TypeVar("M", bound=BaseModel)


def handler(subcommand: str) -> Callable[[Handler], Handler]:
    """Register the function executing one subcommand."""

    def register(fn: Handler) -> Handler:
        HANDLERS[subcommand] = fn
        return fn

    return register


def load_document(job: JobSpec, name: str, model: Type[M]) -> M:
    """
    Read and validate the input named `name`; "-" reads standard input.

    Raises:
        InvalidInput: the input is missing or unreadable.
    """
    path = job.inputs.get(name)
    if path is None:
        raise InvalidInput(f"missing input document {name!r}")
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as f:
                text = f.read()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc
    return model.model_validate_json(text)


def require_p(job: JobSpec) -> int:
    if job.p is None:
        raise InvalidInput(f"{job.subcommand} needs -p")
    return job.p


@contextmanager
def interval_depth(depth):
    """Temporarily override TROPK_INTERVAL_DEPTH."""
    if depth is None:
        yield
        return
    previous = os.environ.get("TROPK_INTERVAL_DEPTH")
    os.environ["TROPK_INTERVAL_DEPTH"] = str(depth)
    try:
        yield
    finally:
        if previous is None:
            os.environ.pop("TROPK_INTERVAL_DEPTH", None)
        else:
            os.environ["TROPK_INTERVAL_DEPTH"] = previous


def _error(reason: str, detail: str) -> dict:
    return ErrorDocument(error=reason, detail=detail).model_dump()


def run_handler(job: JobSpec) -> Tuple[dict, int]:
    """Execute a job; every failure becomes an error document and an exit code."""
    fn = HANDLERS.get(job.subcommand)
    if fn is None:
        return _error("unknown_subcommand", f"no handler for {job.subcommand}"), 1
    try:
        with interval_depth(job.depth):
            result = fn(job)
        return result.model_dump(mode="json", exclude_none=True), 0
    except TropkError as e:
        logger.debug("%s failed: %s", job.subcommand, e.detail)
        return e.document(), e.exit_code
    except ValidationError as e:
        return _error("invalid_document", str(e)), 1
    except json.JSONDecodeError as e:
        return _error("invalid_json", str(e)), 1
    except Exception as e:
        logging.error(f"{job.subcommand} failed unexpectedly: {e}")
        return _error("internal_error", str(e)), 2


def emit(document: dict, output: str = "-"):
    """Write a document as canonical JSON (sorted keys, trailing newline)."""
    text = json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if output in (None, "-"):
        click.echo(text, nl=False)
    else:
        with open(output, "w", encoding="utf-8") as f:
            f.write(text)


def execute(job: JobSpec, output: str = "-"):
    """Run a job from a click command and exit with its code."""
    document, code = run_handler(job)
    emit(document, output)
    if code:
        sys.exit(code)


def output_option(fn):
    return click.option(
        "-o", "--output", default="-", type=click.Path(allow_dash=True), help="Output file, '-' for stdout."
    )(fn)


def depth_option(fn):
    return click.option("--depth", type=int, default=None, help="Override TROPK_INTERVAL_DEPTH.")(fn)


def parse_vector(text: str):
    """A comma separated integer vector such as "1,-2"."""
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InvalidInput(f"{text!r} is not a comma separated integer vector") from exc
