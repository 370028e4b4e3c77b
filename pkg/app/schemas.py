"""Wire models shared by the HTTP routes and the CLI's JSON output."""
from fractions import Fraction
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.services.errors import DomainError
from app.services.packing_service import PackingResult
from app.services.reduction_service import SimplePairInstance
from app.services.sampling_service import EstimateReport, PairAnalysis, SampleOutcome
from app.services.tree_service import LabeledTree


def fraction_text(value: Fraction) -> str:
    return str(Fraction(value))


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"Cannot parse rational {text!r}")


# Requests

class SequenceRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    d: List[int] = Field(alias="D")


class PairRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    d: List[int] = Field(alias="D")
    f: List[int] = Field(alias="F")


class SeededPairRequest(PairRequest):
    seed: int


class SeededSequenceRequest(SequenceRequest):
    seed: int


class EdgeProbabilityRequest(SequenceRequest):
    i: int
    j: int


class HamiltonianRequest(BaseModel):
    n: int


class MatrixRequest(BaseModel):
    rows: List[List[int]]


class MultiRequest(MatrixRequest):
    seed: int


class SamplesNeededRequest(BaseModel):
    p: str
    epsilon: float
    delta: float

    @field_validator("p")
    @classmethod
    def _rational(cls, value: str) -> str:
        parse_fraction(value)
        return value


class EstimateRequest(PairRequest):
    epsilon: Optional[float] = None
    delta: Optional[float] = None
    seed: int
    workers: Optional[int] = None
    batch_size: Optional[int] = None


class SampleRequest(PairRequest):
    epsilon: Optional[float] = None
    seed: int


class TvRequest(BaseModel):
    p: List[float]
    q: List[float]


class BipartiteRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    n1: int
    n2: int
    d: List[List[int]] = Field(alias="D")
    f: List[List[int]] = Field(alias="F")


# Responses

class TreeResponse(BaseModel):
    n: int
    edges: List[List[int]]

    @classmethod
    def of(cls, tree: LabeledTree) -> "TreeResponse":
        return cls(n=tree.n, edges=[list(e) for e in tree.sorted_edges()])


class TreeListResponse(BaseModel):
    count: int
    trees: List[TreeResponse]


class PackingResponse(BaseModel):
    n: int
    trees: List[List[List[int]]]

    @classmethod
    def of(cls, result: PackingResult) -> "PackingResponse":
        return cls(**result.to_dict())


class OptionalPackingResponse(BaseModel):
    found: bool
    packing: Optional[PackingResponse] = None


class BooleanResponse(BaseModel):
    answer: bool
    detail: str = ""


class ClassResponse(BaseModel):
    sequence_class: str


class CountResponse(BaseModel):
    count: int


class RationalResponse(BaseModel):
    value: str


class FloatResponse(BaseModel):
    value: float


class PairAnalysisResponse(BaseModel):
    a: List[int]
    b: List[int]
    expected_common: str
    p_lower: str

    @classmethod
    def of(cls, analysis: PairAnalysis) -> "PairAnalysisResponse":
        return cls(
            a=sorted(analysis.a),
            b=sorted(analysis.b),
            expected_common=fraction_text(analysis.expected_common),
            p_lower=fraction_text(analysis.p_lower),
        )


class EstimateReportResponse(BaseModel):
    samples_used: int
    hits: int
    p_hat: str
    count_estimate: str
    epsilon: float
    delta: float
    seed: int
    workers: int
    batch_size: int

    @classmethod
    def of(cls, report: EstimateReport) -> "EstimateReportResponse":
        return cls(
            samples_used=report.samples_used,
            hits=report.hits,
            p_hat=fraction_text(report.p_hat),
            count_estimate=fraction_text(report.count_estimate),
            epsilon=report.epsilon,
            delta=report.delta,
            seed=report.seed,
            workers=report.workers,
            batch_size=report.batch_size,
        )


class SampleResponse(PackingResponse):
    attempts: int
    budget: int
    fallback: bool

    @classmethod
    def from_outcome(cls, outcome: SampleOutcome) -> "SampleResponse":
        return cls(
            n=outcome.trees[0].n,
            trees=[[list(e) for e in t.sorted_edges()] for t in outcome.trees],
            attempts=outcome.attempts,
            budget=outcome.budget,
            fallback=outcome.fallback,
        )


class InstanceResponse(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    d: List[int] = Field(alias="D")
    f: List[int] = Field(alias="F")

    @classmethod
    def of(cls, instance: SimplePairInstance) -> "InstanceResponse":
        return cls(D=list(instance.d.degrees), F=list(instance.f.degrees))
