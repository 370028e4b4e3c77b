import logging

from fastapi import APIRouter, HTTPException

from app.schemas import BooleanResponse, ClassResponse, SequenceRequest
from app.services.degseq_service import DegreeSequence, classify, is_graphical
from app.services.errors import TreePackError

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/degseq", tags=["Degree Sequences"])


@router.post("/graphical", response_model=BooleanResponse)
async def graphical(body: SequenceRequest):
    try:
        return BooleanResponse(answer=is_graphical(DegreeSequence.of(body.d)))
    except TreePackError as e:
        logger.warning(f"graphical rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/classify", response_model=ClassResponse)
async def classify_sequence(body: SequenceRequest):
    try:
        return ClassResponse(sequence_class=classify(DegreeSequence.of(body.d)).value)
    except TreePackError as e:
        logger.warning(f"classify rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)
