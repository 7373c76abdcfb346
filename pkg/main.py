import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from backend.app.config import LOG_LEVEL
from backend.app.schemas import RunConfig
from config import BACKEND_URL, DEFAULT_CHAIN_LENGTH, DEFAULT_SQUEEZING
from dispatcher import handle_request

logger = logging.getLogger("decoherence")


def _common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", dest="fmt", choices=["csv", "json"], default="json")
    sub.add_argument("--output", default=None, help="Write to this file instead of stdout")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--backend-url", default=BACKEND_URL, help="Forward the request to a running backend")


def _point(sub: argparse.ArgumentParser, tsq_required: bool = True) -> None:
    sub.add_argument("--s", type=float, default=DEFAULT_SQUEEZING, help="Two-mode squeezing parameter")
    sub.add_argument("--nbar", type=float, required=True, help="Mean thermal photon number")
    sub.add_argument("--tsq", type=float, required=tsq_required, help="Transmittivity t^2 in [0, 1]")


def _model(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--model", choices=["collective", "chain", "closed_form"], default="collective")
    sub.add_argument("--chain", dest="n_splitters", type=int, default=DEFAULT_CHAIN_LENGTH,
                     help="Number of beam splitters for the chain model")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="decoherence",
        description="Entanglement structure of a two-mode squeezed state decohering in a thermal environment",
    )
    subs = ap.add_subparsers(dest="command", required=True)

    classify = subs.add_parser("classify", help="Classify one (n_bar, t^2) point")
    _point(classify)
    _model(classify)
    _common(classify)

    sweep = subs.add_parser("sweep", help="Sweep the (n_bar, t^2) plane")
    sweep.add_argument("--nbar-range", nargs=3, type=float, required=True, metavar=("MIN", "MAX", "COUNT"))
    sweep.add_argument("--tsq-range", nargs=3, type=float, required=True, metavar=("MIN", "MAX", "COUNT"))
    sweep.add_argument("--s", type=float, default=DEFAULT_SQUEEZING)
    _model(sweep)
    _common(sweep)

    thresholds = subs.add_parser("thresholds", help="Analytic separability thresholds in t^2")
    thresholds.add_argument("--nbar", type=float, required=True)
    _common(thresholds)

    crosscheck = subs.add_parser("crosscheck", help="Compare the equivalent dynamical models")
    _point(crosscheck)
    crosscheck.add_argument("--chain", dest="n_splitters", type=int, default=DEFAULT_CHAIN_LENGTH)
    crosscheck.add_argument("--steps", type=int, default=1000, help="RK4 steps for the moment equations")
    crosscheck.add_argument("--samples", type=int, default=0, help="Extra random points drawn with --seed")
    _common(crosscheck)

    purify = subs.add_parser("purify", help="Hidden-mode entanglement of the purified environment")
    _point(purify)
    _model(purify)
    _common(purify)

    trajectory = subs.add_parser("trajectory", help="a1-a2 margin along the decay path")
    _point(trajectory)
    trajectory.add_argument("--steps", type=int, default=1000)
    trajectory.add_argument("--samples", type=int, default=11)
    _common(trajectory)

    serve = subs.add_parser("serve", help="Run the HTTP backend")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=5000)
    return ap


def _to_config(args: argparse.Namespace) -> RunConfig:
    fields = {k: v for k, v in vars(args).items() if v is not None}
    renames = {"nbar": "n_bar", "tsq": "t_sq"}
    data = {renames.get(k, k): v for k, v in fields.items()}
    for axis in ("nbar_range", "tsq_range"):
        if axis in data:
            lo, hi, count = data[axis]
            if count != int(count):
                raise ValueError(f"--{axis.replace('_', '-')} COUNT must be an integer")
            data[axis] = (lo, hi, int(count))
    return RunConfig.model_validate(data)


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=LOG_LEVEL, stream=sys.stderr)
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        uvicorn.run("backend.app.app:app", host=args.host, port=args.port)
        return 0

    try:
        config = _to_config(args)
    except (ValidationError, ValueError) as e:
        print(f"Invalid parameters: {e}", file=sys.stderr)
        return 1

    status, text = handle_request(config)
    if status != 0 and text.startswith("Error:"):
        print(text, file=sys.stderr)
        return status
    if config.output:
        Path(config.output).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {config.output}")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
