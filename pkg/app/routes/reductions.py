import logging

from fastapi import APIRouter, HTTPException

from app.schemas import BipartiteRequest, BooleanResponse, InstanceResponse, PairRequest
from app.services.errors import TreePackError
from app.services.reduction_service import (
    BipartitePairInstance,
    SimplePairInstance,
    add_dominating_vertex,
    add_pendant_gadget,
    bipartite_to_simple,
    brute_force_bipartite_decision,
    brute_force_disjoint_decision,
    reduce_to_tree_sequence,
    reduction_chain,
)

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/reductions", tags=["Reductions"])


def _bipartite(body: BipartiteRequest) -> BipartitePairInstance:
    if len(body.d) != 2 or len(body.f) != 2:
        raise HTTPException(status_code=422, detail="D and F each need exactly two classes")
    return BipartitePairInstance(body.n1, body.n2, (body.d[0], body.d[1]), (body.f[0], body.f[1]))


@router.post("/bipartite", response_model=InstanceResponse)
async def to_simple(body: BipartiteRequest):
    try:
        return InstanceResponse.of(bipartite_to_simple(_bipartite(body)))
    except TreePackError as e:
        logger.warning(f"bipartite reduction rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/dominate", response_model=InstanceResponse)
async def dominate(body: PairRequest):
    try:
        return InstanceResponse.of(add_dominating_vertex(SimplePairInstance.of(body.d, body.f)))
    except TreePackError as e:
        logger.warning(f"dominating vertex rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/pendant", response_model=InstanceResponse)
async def pendant(body: PairRequest):
    try:
        return InstanceResponse.of(add_pendant_gadget(SimplePairInstance.of(body.d, body.f)))
    except TreePackError as e:
        logger.warning(f"pendant gadget rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/tree", response_model=InstanceResponse)
async def to_tree_sequence(body: PairRequest):
    try:
        return InstanceResponse.of(reduce_to_tree_sequence(SimplePairInstance.of(body.d, body.f)))
    except TreePackError as e:
        logger.warning(f"tree reduction rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/chain", response_model=InstanceResponse)
async def chain(body: BipartiteRequest):
    try:
        return InstanceResponse.of(reduction_chain(_bipartite(body)))
    except TreePackError as e:
        logger.warning(f"reduction chain rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/decide", response_model=BooleanResponse)
async def decide(body: PairRequest):
    try:
        return BooleanResponse(answer=brute_force_disjoint_decision(SimplePairInstance.of(body.d, body.f)))
    except TreePackError as e:
        logger.warning(f"brute-force decision rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/decide-bipartite", response_model=BooleanResponse)
async def decide_bipartite(body: BipartiteRequest):
    try:
        return BooleanResponse(answer=brute_force_bipartite_decision(_bipartite(body)))
    except TreePackError as e:
        logger.warning(f"bipartite decision rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)
