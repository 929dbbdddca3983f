# specific_models.py
from typing import Dict, List, Optional

from pydantic import BaseModel

from models.base_models import FanDocument


class ErrorDocument(BaseModel):
    error: str
    detail: str


class FpDocument(BaseModel):
    p: int
    dim: int
    pairing_basis: List[List[str]]
    flag_kernel_equal: Optional[bool] = None


class LocateDocument(BaseModel):
    canonical_levels: List[List[List[str]]]
    height: int
    cone: List[List[int]]
    cone_dim: int


class RefineDocument(BaseModel):
    fan: FanDocument
    steps: List[List[int]] = []


class GerstenDocument(BaseModel):
    p: int
    term_dims: List[int]
    h: List[int]
    top_cokernel: int
    chow_oracle: Optional[int] = None
    match: Optional[bool] = None


class ChowDocument(BaseModel):
    p: int
    dim: int
    method: str


class HeightDocument(BaseModel):
    height: int
    rational_rank: int
    cuts: List[int]


class ValueGroupDocument(BaseModel):
    levels: int
    basis: List[str]
    generators: List[List[List[str]]]


class ResidueDocument(BaseModel):
    kind: str
    degree: int
    scalar: Optional[str] = None
    primes: Dict[str, str] = {}
    coordinates: Optional[List[str]] = None
    vanishes: Optional[bool] = None


class TransferResultDocument(BaseModel):
    index: int
    coordinates: List[str]
    ambient: List[str]
