import logging

from fastapi import APIRouter, HTTPException

from app.schemas import (
    BooleanResponse,
    HamiltonianRequest,
    MultiRequest,
    OptionalPackingResponse,
    PackingResponse,
    PairRequest,
    SeededPairRequest,
)
from app.services.degseq_service import DegreeSequence
from app.services.errors import TreePackError
from app.services.packing_service import (
    MultiInstance,
    PackingResult,
    disjoint_hamiltonian_paths,
    find_disjoint_caterpillars,
    kundu_packable,
    pack_caterpillars,
    pack_complementary_leaves,
    pack_multi,
)

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/packing", tags=["Packing"])


@router.post("/hamiltonian-paths", response_model=PackingResponse)
async def hamiltonian_paths(body: HamiltonianRequest):
    try:
        return PackingResponse.of(PackingResult(body.n, disjoint_hamiltonian_paths(body.n)))
    except TreePackError as e:
        logger.warning(f"hamiltonian paths rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/caterpillars", response_model=PackingResponse)
async def caterpillars(body: PairRequest):
    try:
        return PackingResponse.of(pack_caterpillars(DegreeSequence.of(body.d), DegreeSequence.of(body.f)))
    except TreePackError as e:
        logger.warning(f"caterpillar packing rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/caterpillar-search", response_model=OptionalPackingResponse)
async def caterpillar_search(body: PairRequest):
    """Exhaustive search for disjoint caterpillar realizations, including common-leaf pairs."""
    try:
        found = find_disjoint_caterpillars(DegreeSequence.of(body.d), DegreeSequence.of(body.f))
        if found is None:
            return OptionalPackingResponse(found=False)
        return OptionalPackingResponse(found=True, packing=PackingResponse.of(found))
    except TreePackError as e:
        logger.warning(f"caterpillar search rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/kundu", response_model=BooleanResponse)
async def kundu(body: PairRequest):
    try:
        packable = kundu_packable(DegreeSequence.of(body.d), DegreeSequence.of(body.f))
        return BooleanResponse(answer=packable, detail="packable" if packable else "sum not graphical")
    except TreePackError as e:
        logger.warning(f"kundu rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/complementary-leaves", response_model=PackingResponse)
async def complementary_leaves(body: SeededPairRequest):
    try:
        result = pack_complementary_leaves(DegreeSequence.of(body.d), DegreeSequence.of(body.f), body.seed)
        return PackingResponse.of(result)
    except TreePackError as e:
        logger.warning(f"complementary packing rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)


@router.post("/multi", response_model=PackingResponse)
async def multi(body: MultiRequest):
    try:
        return PackingResponse.of(pack_multi(MultiInstance.of(body.rows), body.seed))
    except TreePackError as e:
        logger.warning(f"multi packing rejected: {e.message}")
        raise HTTPException(status_code=e.status_code, detail=e.message)
