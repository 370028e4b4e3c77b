import logging

from fastapi import FastAPI

from config import settings
from app.routes.degseq import router as degseq_router
from app.routes.packing import router as packing_router
from app.routes.reductions import router as reductions_router
from app.routes.sampling import router as sampling_router
from app.routes.trees import router as trees_router

# Set up logging
logging.basicConfig(level=settings.log_level)
logger = logging.getLogger(__name__)


app = FastAPI(title="treepack")


## Request and response tracking
@app.middleware("http")
async def log_requests(request, call_next):
    logger.info(f"Incoming Request: {request.method} {request.url}")
    response = await call_next(request)
    logger.info(f"Response: {response.status_code}")
    return response

#  Include Routers
app.include_router(degseq_router)
app.include_router(trees_router)
app.include_router(packing_router)
app.include_router(sampling_router)
app.include_router(reductions_router)


@app.get("/")
def root():
    logger.info("Root API is running!")
    return {"message": "treepack API is running"}

@app.get("/health")
async def health():
    return {"message": "Health Okay"}
