import json
import warnings
from pathlib import Path

import pytest
from pydantic import ValidationError

from app import run
from models.base_models import FanDocument, FlagDocument, JobSpec, SymbolDocument

SAMPLES = Path(__file__).parent.parent / "samples"


def sample(name):
    return str(SAMPLES / name)


# Validate the documents the CLI reads and check pydantic emits no deprecation warnings


def test_deprecation_warnings():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        fan = FanDocument.model_validate_json(json.dumps({"rank": 2, "rays": [[1, 0], [0, 1]], "cones": [[0, 1]]}))
        assert fan.cones == [[0, 1]]
        flag = FlagDocument.model_validate({"levels": [[1, 0], [0, 1]]})
        assert flag.rank == 2
        document, code = run(JobSpec(subcommand="chow", inputs={"fan": sample("p2.json")}, p=2))
        assert code == 0
        assert document["method"] == "degree"
        for warning in w:
            print(warning.message)
            assert not issubclass(warning.category, DeprecationWarning), f"Deprecation warning found: {warning.message}"


def test_fan_document_validation():
    with pytest.raises(ValidationError):
        FanDocument(rank=2, rays=[[1, 0, 0]], cones=[])
    with pytest.raises(ValidationError):
        FanDocument(rank=2, rays=[[1, 0]], cones=[[0, 3]])


def test_flag_document_validation():
    with pytest.raises(ValidationError):
        FlagDocument(levels=[[1, 0], [1]])
    with pytest.raises(ValidationError):
        FlagDocument(levels=[[[1, 2, 3], 0]])


def test_symbol_document_validation():
    with pytest.raises(ValidationError):
        SymbolDocument(kind="tame", entries=[])
    with pytest.raises(ValidationError):
        SymbolDocument(kind="toric", omega=[1])
    assert SymbolDocument(kind="factor", entries=[[1, 0], [0, 1]]).entries == [[1, 0], [0, 1]]


if __name__ == "__main__":
    pytest.main(["-v", "tests/test_deprecations.py"])
