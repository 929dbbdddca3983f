# base_models.py
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

RationalLike = Union[int, str]
Entry = Union[RationalLike, List[RationalLike]]


class FanDocument(BaseModel):
    rank: int = Field(..., ge=0)
    rays: List[List[int]]
    cones: List[List[int]]

    model_config = ConfigDict(
        json_schema_extra={
            "example": {"rank": 2, "rays": [[-1, -1], [0, 1], [1, 0]], "cones": [[0], [1], [2]]}
        }
    )

    @model_validator(mode="after")
    def check_indices(self):
        for ray in self.rays:
            if len(ray) != self.rank:
                raise ValueError(f"ray {ray} does not have length {self.rank}")
        for cone in self.cones:
            for i in cone:
                if not 0 <= i < len(self.rays):
                    raise ValueError(f"cone {cone} refers to a missing ray")
        return self


class PolynomialDocument(BaseModel):
    vars: int = Field(..., ge=1)
    exponents: List[List[int]]

    model_config = ConfigDict(json_schema_extra={"example": {"vars": 2, "exponents": [[0, 0], [1, 0], [0, 1]]}})


class BasisElementDocument(BaseModel):
    name: str
    enclosure: List[RationalLike] = Field(..., min_length=2, max_length=2)
    polynomial: Optional[List[RationalLike]] = None


class FlagDocument(BaseModel):
    """
    Levels of a flag in N_R (or of a monomial valuation on Z^rank).

    An entry is either a rational or its coefficient list over (1, basis...).
    """

    rank: Optional[int] = None
    basis: List[BasisElementDocument] = []
    levels: List[List[Entry]]

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "basis": [{"name": "sqrt2", "enclosure": ["7/5", "3/2"], "polynomial": [1, 0, -2]}],
                "levels": [[[0, 1], [1, 0]]],
            }
        }
    )

    @model_validator(mode="after")
    def check_levels(self):
        widths = {len(level) for level in self.levels}
        if self.rank is not None:
            widths.add(self.rank)
        if len(widths) > 1:
            raise ValueError("levels must all have the same length")
        if self.rank is None:
            self.rank = widths.pop() if widths else 0
        size = len(self.basis) + 1
        for level in self.levels:
            for entry in level:
                if isinstance(entry, list) and len(entry) > size:
                    raise ValueError(f"entry {entry} has more than {size} coefficients")
        return self


class FactoredFunctionDocument(BaseModel):
    """constant * prod (t - roots[i])^exps[i], or a polynomial in t to be factored over Q."""

    constant: RationalLike = 1
    roots: List[RationalLike] = []
    exps: List[int] = []
    polynomial: Optional[List[RationalLike]] = None

    @model_validator(mode="after")
    def check_shape(self):
        if len(self.roots) != len(self.exps):
            raise ValueError("roots and exps must have the same length")
        if self.polynomial is not None and self.roots:
            raise ValueError("give either roots or a polynomial")
        return self


class SymbolDocument(BaseModel):
    """
    A Milnor symbol together with the place of its residue.

    kind "tame": entries are functions of t and `point` is a rational or "inf".
    kind "toric": `omega` is a symbol over M n tau^perp and the residue is taken
    along sigma; tau and sigma are ray-index lists of cones of `fan`.
    kind "factor": entries are functions of t or integer exponent vectors.
    """

    kind: Literal["tame", "toric", "factor"] = "tame"
    entries: List[Union[FactoredFunctionDocument, List[int]]] = []
    point: Optional[Union[RationalLike, List[RationalLike]]] = None
    power: Optional[int] = Field(None, ge=1)
    fan: Optional[FanDocument] = None
    tau: List[int] = []
    sigma: List[int] = []
    omega: List[RationalLike] = []
    degree: Optional[int] = Field(None, ge=0)
    uniformizer: Optional[List[int]] = None

    @model_validator(mode="after")
    def check_kind(self):
        if self.kind == "tame" and self.point is None:
            raise ValueError("a tame residue needs a point")
        if self.kind == "toric" and (self.fan is None or self.degree is None):
            raise ValueError("a toric residue needs a fan and a degree")
        return self


class TransferDocument(BaseModel):
    basis: List[List[int]]
    element: List[RationalLike]
    p: int = Field(..., ge=0)
    restrict: bool = False

    model_config = ConfigDict(json_schema_extra={"example": {"basis": [[2]], "element": [1], "p": 1}})


class JobSpec(BaseModel):
    subcommand: Literal[
        "hyp", "fp", "locate", "refine", "gersten", "chow", "val-height", "val-reduce", "residue", "transfer"
    ]
    inputs: Dict[str, str] = {}
    p: Optional[int] = Field(None, ge=0)
    seed: Optional[int] = None
    depth: Optional[int] = Field(None, ge=0)
    options: Dict[str, Any] = {}

    @field_validator("inputs")
    @classmethod
    def non_empty_paths(cls, value: Dict[str, str]) -> Dict[str, str]:
        for name, path in value.items():
            if not path:
                raise ValueError(f"input {name} has an empty path")
        return value
