import logging

from fastapi import APIRouter, HTTPException

from app.schemas import (
    CountResponse,
    EdgeProbabilityRequest,
    RationalResponse,
    SeededSequenceRequest,
    SequenceRequest,
    TreeListResponse,
    TreeResponse,
    fraction_text,
)
from app.services.degseq_service import DegreeSequence
from app.services.errors import TreePackError
from app.services.tree_service import count_trees, edge_probability, list_trees, random_tree

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/trees", tags=["Trees"])


@router.post("/count", response_model=CountResponse)
async def count(body: SequenceRequest):
    try:
        return CountResponse(count=count_trees(DegreeSequence.of(body.d)))
    except TreePackError as e:
        logger.warning(f"count rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/enumerate", response_model=TreeListResponse)
async def enumerate_realizations(body: SequenceRequest):
    """Every realization, refused above the enumeration guard."""
    try:
        trees = list_trees(DegreeSequence.of(body.d))
        return TreeListResponse(count=len(trees), trees=[TreeResponse.of(t) for t in trees])
    except TreePackError as e:
        logger.warning(f"enumerate rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/random", response_model=TreeResponse)
async def random_realization(body: SeededSequenceRequest):
    try:
        return TreeResponse.of(random_tree(DegreeSequence.of(body.d), body.seed))
    except TreePackError as e:
        logger.warning(f"random tree rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/edge-probability", response_model=RationalResponse)
async def probability_of_edge(body: EdgeProbabilityRequest):
    try:
        value = edge_probability(DegreeSequence.of(body.d), body.i, body.j)
        return RationalResponse(value=fraction_text(value))
    except TreePackError as e:
        logger.warning(f"edge probability rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)
