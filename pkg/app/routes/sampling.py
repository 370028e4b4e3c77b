import logging

from fastapi import APIRouter, HTTPException

from app.schemas import (
    CountResponse,
    EstimateReportResponse,
    EstimateRequest,
    FloatResponse,
    PairAnalysisResponse,
    PairRequest,
    RationalResponse,
    SampleRequest,
    SampleResponse,
    SamplesNeededRequest,
    TvRequest,
    fraction_text,
    parse_fraction,
)
from config import settings
from app.services.degseq_service import DegreeSequence
from app.services.errors import TreePackError
from app.services.sampling_service import (
    analyze_pair,
    estimate_disjoint_count,
    exact_disjoint_count,
    expected_common_general,
    required_samples,
    sample_disjoint_pair_outcome,
    tv_distance,
)

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/sampling", tags=["Sampling"])


@router.post("/analyze", response_model=PairAnalysisResponse)
async def analyze(body: PairRequest):
    try:
        return PairAnalysisResponse.of(analyze_pair(DegreeSequence.of(body.d), DegreeSequence.of(body.f)))
    except TreePackError as e:
        logger.warning(f"analyze rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/expected-common", response_model=RationalResponse)
async def expected_common(body: PairRequest):
    try:
        value = expected_common_general(DegreeSequence.of(body.d), DegreeSequence.of(body.f))
        return RationalResponse(value=fraction_text(value))
    except TreePackError as e:
        logger.warning(f"expected common rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/samples-needed", response_model=CountResponse)
async def samples_needed(body: SamplesNeededRequest):
    try:
        return CountResponse(count=required_samples(parse_fraction(body.p), body.epsilon, body.delta))
    except TreePackError as e:
        logger.warning(f"samples needed rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/estimate", response_model=EstimateReportResponse)
async def estimate(body: EstimateRequest):
    try:
        report = estimate_disjoint_count(
            DegreeSequence.of(body.d),
            DegreeSequence.of(body.f),
            epsilon=body.epsilon if body.epsilon is not None else settings.epsilon,
            delta=body.delta if body.delta is not None else settings.delta,
            seed=body.seed,
            workers=body.workers,
            batch_size=body.batch_size,
        )
        return EstimateReportResponse.of(report)
    except TreePackError as e:
        logger.warning(f"estimate rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/sample", response_model=SampleResponse)
async def sample(body: SampleRequest):
    try:
        outcome = sample_disjoint_pair_outcome(
            DegreeSequence.of(body.d),
            DegreeSequence.of(body.f),
            epsilon=body.epsilon if body.epsilon is not None else settings.epsilon,
            seed=body.seed,
        )
        return SampleResponse.from_outcome(outcome)
    except TreePackError as e:
        logger.warning(f"sample rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/exact-count", response_model=CountResponse)
async def exact_count(body: PairRequest):
    try:
        return CountResponse(count=exact_disjoint_count(DegreeSequence.of(body.d), DegreeSequence.of(body.f)))
    except TreePackError as e:
        logger.warning(f"exact count rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/tv", response_model=FloatResponse)
async def total_variation(body: TvRequest):
    try:
        return FloatResponse(value=tv_distance(body.p, body.q))
    except TreePackError as e:
        logger.warning(f"tv rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)
