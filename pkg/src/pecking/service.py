"""HTTP facade over the experiment commands.

The service owns no logic: each endpoint parses the posted config, calls
the matching command, and returns its CSV/rows/report payload. Domain
validation errors surface as HTTP 422 so clients can distinguish bad
input (1) from a failed verification (2) the way the CLI exit codes do.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .bonabeau import EngineError
from .config import ConfigError, parse_config
from .experiments import (cmd_competing, cmd_meanfield, cmd_stability,
                          cmd_sweep, cmd_verify)
from .graphs import GraphError
from .meanfield import MeanfieldError
from .oracle import OracleError
from .plotting import PlotError, emit_svg_plot
from .spectral import SpectralError

_CLIENT_ERRORS = (ConfigError, GraphError, EngineError, SpectralError,
                  MeanfieldError, OracleError, PlotError)


class ConfigRequest(BaseModel):
    config: dict


class PlotRequest(BaseModel):
    rows: list[dict]
    x_axis: str = Field(default="mu")


class HealthResponse(BaseModel):
    status: str
    version: str


class GraphResponse(BaseModel):
    graph_id: str
    n: int
    edge_count: int
    edge_list: str


class TableResponse(BaseModel):
    csv: str
    rows: list[dict]


class CompetingResponse(BaseModel):
    csv: str
    rows: list[dict]
    summary: dict


class MeanfieldResponse(BaseModel):
    csv: str
    rows: list[dict]
    extras: dict


class VerifyResponse(BaseModel):
    report: str
    passed: bool
    counts: dict


class PlotResponse(BaseModel):
    svg: str


def create_app() -> FastAPI:
    app = FastAPI(title="pecking", version=__version__)

    def guarded(fn, *args):
        try:
            return fn(*args)
        except _CLIENT_ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/graph/build", response_model=GraphResponse)
    def graph_build(req: ConfigRequest):
        from .graphs import edge_list_text
        cfg = guarded(parse_config, req.config)
        g = cfg.graph
        return GraphResponse(graph_id=g.graph_id, n=g.n,
                             edge_count=g.edge_count,
                             edge_list=edge_list_text(g))

    @app.post("/stability", response_model=TableResponse)
    def stability(req: ConfigRequest):
        cfg = guarded(parse_config, req.config)
        csv, rows = guarded(cmd_stability, cfg)
        return TableResponse(csv=csv, rows=rows)

    @app.post("/sweep", response_model=TableResponse)
    def sweep(req: ConfigRequest):
        cfg = guarded(parse_config, req.config)
        csv, rows = guarded(cmd_sweep, cfg)
        return TableResponse(csv=csv, rows=rows)

    @app.post("/competing", response_model=CompetingResponse)
    def competing(req: ConfigRequest):
        cfg = guarded(parse_config, req.config)
        csv, rows, summary = guarded(cmd_competing, cfg)
        return CompetingResponse(csv=csv, rows=rows, summary=summary)

    @app.post("/meanfield", response_model=MeanfieldResponse)
    def meanfield(req: ConfigRequest):
        cfg = guarded(parse_config, req.config)
        csv, rows, extras = guarded(cmd_meanfield, cfg)
        return MeanfieldResponse(csv=csv, rows=rows, extras=extras)

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: ConfigRequest):
        cfg = guarded(parse_config, req.config)
        report, passed, counts = guarded(cmd_verify, cfg)
        return VerifyResponse(report=report, passed=passed, counts=counts)

    @app.post("/plot", response_model=PlotResponse)
    def plot(req: PlotRequest):
        svg = guarded(emit_svg_plot, req.rows, req.x_axis)
        return PlotResponse(svg=svg)

    return app


app = create_app()
