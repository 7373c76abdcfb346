import logging

from fastapi import FastAPI

from .analysis_routes import router as analysis_router
from .config import LOG_LEVEL

logging.basicConfig(level=LOG_LEVEL)

app = FastAPI(title="CV decoherence analyst")


@app.get("/", response_model=dict)
async def read_root():
    return {"message": "Two-mode squeezed state decoherence analysis backend"}


@app.get("/health", response_model=dict)
async def health_check():
    return {"status": "ok"}


app.include_router(analysis_router)
