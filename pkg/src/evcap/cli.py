"""Command-line entry point.

One multiplexed binary with subcommands: convert, render, esr, ratios,
annotate, qa-sample, serve, mix, train-toy, gradcheck, bench. Diagnostics go
to stderr, data to stdout or files; exit status is 0 iff no error. Option
precedence is flags > environment > config file > defaults, with the config
file holding line-oriented key=value pairs.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import time

import numpy as np

from . import align, ingest, representation
from .captions import client as caption_client
from .captions import engine as caption_engine
from .captions.manifest import ManifestStore
from .captions.service import serve_review_api
from .errors import EvcapError
from .events import SensorGeometry
from .representation import EsrConfig

GRADCHECK_THRESHOLD = 1e-6


def load_config_file(path: str) -> dict[str, str]:
    """Parse line-oriented key=value pairs; '#' starts a comment."""
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise EvcapError(f"config line without '=': {line!r}")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


class Settings:
    """Flag > env > config-file > default resolution."""

    def __init__(self, config_path: str | None):
        self.file = load_config_file(config_path) if config_path else {}

    def resolve(self, flag, key: str, env: str | None = None, default=None, cast=str):
        if flag is not None:
            return flag
        if env and os.environ.get(env):
            return cast(os.environ[env])
        if key in self.file:
            return cast(self.file[key])
        return default


def _geometry_from_args(args) -> SensorGeometry | None:
    if args.width is None and args.height is None:
        return None
    if args.width is None or args.height is None:
        raise EvcapError("--width and --height must be given together")
    return SensorGeometry(args.width, args.height)


def _read_stream(args, settings: Settings):
    with open(args.input, "rb") as fh:
        data = fh.read()
    geometry = _geometry_from_args(args)
    if geometry is None:
        width = settings.resolve(None, "width", cast=int)
        height = settings.resolve(None, "height", cast=int)
        if width and height:
            geometry = SensorGeometry(int(width), int(height))
    return ingest.parse_any(args.input, data, geometry)


def _esr_config(args, settings: Settings) -> EsrConfig:
    n_epsilon = settings.resolve(args.n_epsilon, "n_epsilon", default=20000, cast=int)
    total = settings.resolve(args.total_events, "total_events", cast=int)
    return EsrConfig(
        n_epsilon=n_epsilon,
        total_events=total,
        n_min=settings.resolve(args.n_min, "n_min", default=1, cast=int),
        n_max=settings.resolve(args.n_max, "n_max", default=6, cast=int),
        tile_size=settings.resolve(args.tile_size, "tile_size", default=448, cast=int),
    )


# ---------------------------------------------------------------------------
# commands


def cmd_convert(args, settings: Settings) -> int:
    stream = _read_stream(args, settings)
    with open(args.output, "wb") as fh:
        fh.write(ingest.write_evt_bin(stream))
    geo = stream.geometry
    print(f"events={len(stream)} geometry={geo.width}x{geo.height}")
    return 0


def cmd_render(args, settings: Settings) -> int:
    stream = _read_stream(args, settings)
    frame = representation.render_frame(stream)
    with open(args.output, "wb") as fh:
        fh.write(representation.write_ppm(frame))
    print(f"wrote {args.output} ({frame.width}x{frame.height})")
    return 0


def cmd_esr(args, settings: Settings) -> int:
    stream = _read_stream(args, settings)
    config = _esr_config(args, settings)
    bundle = representation.assemble_esr(stream, config)
    out_dir = args.out_dir or "esr_out"
    representation.export_bundle(bundle, out_dir)
    cols, rows = bundle.chosen_ratio
    print(
        f"{len(bundle.temporal.level1)} {len(bundle.temporal.level2)} 1 {cols * rows}"
    )
    return 0


def cmd_ratios(args, settings: Settings) -> int:
    ratio_set = representation.generate_adaptive_ratios(args.n_min, args.n_max)
    for cols, rows in ratio_set:
        print(f"{cols} {rows}")
    return 0


def cmd_gradcheck(args, settings: Settings) -> int:
    epsilon = args.epsilon
    if args.dims == 1:
        # quadratic self-test: f(w) = w^2 has an exact central difference
        err = align.grad_check(
            lambda v: (float(v[0] ** 2), np.array([2.0 * v[0]])), np.array([3.0]), epsilon
        )
        print(f"max relative error: {err:.3e}")
        return 0 if err <= GRADCHECK_THRESHOLD else 1
    rng = np.random.default_rng(args.seed)
    dim, vocab, count = args.dims, args.vocab, 3
    errors = []
    errors.append(
        align.grad_check(
            align.cosine_loss_evaluator(count, dim, "flatten"),
            rng.standard_normal(2 * count * dim),
            epsilon,
        )
    )
    errors.append(
        align.grad_check(
            align.cosine_loss_evaluator(count, dim, "per_pair_mean"),
            rng.standard_normal(2 * count * dim),
            epsilon,
        )
    )
    seq = align.TokenSeq((1,), tuple(int(t) for t in rng.integers(0, vocab, size=3)))
    errors.append(
        align.grad_check(
            align.nll_evaluator(seq, vocab, dim),
            0.3 * rng.standard_normal(vocab * dim + vocab * 2 * dim + dim),
            epsilon,
        )
    )
    dataset = align.synthetic_alignment_dataset(4, frame_size=3, vocab_size=vocab, seed=args.seed)
    model = align.init_toy_model(3 * 3 * 3, dim, vocab, seed=args.seed)
    errors.append(
        align.grad_check(
            align.total_loss_evaluator(model, dataset, align.AlignConfig()),
            align.trainable_vector(model),
            epsilon,
        )
    )
    worst = max(errors)
    print(f"max relative error: {worst:.3e}")
    return 0 if worst <= GRADCHECK_THRESHOLD else 1


def cmd_bench(args, settings: Settings) -> int:
    stream = _read_stream(args, settings)
    config = _esr_config(args, settings)
    render_rates = []
    esr_rates = []
    for _ in range(args.iterations):
        start = time.perf_counter()
        representation.render_frame(stream)
        render_rates.append(len(stream) / max(1e-9, time.perf_counter() - start))
        start = time.perf_counter()
        representation.assemble_esr(stream, config)
        esr_rates.append(
            min(len(stream), config.total_events) / max(1e-9, time.perf_counter() - start)
        )
    print(f"render: {int(statistics.median(render_rates))} ev/s")
    print(f"esr: {int(statistics.median(esr_rates))} ev/s")
    return 0


def _caption_client_from(args, settings: Settings):
    if args.mock:
        fail_every = getattr(args, "fail_every", None)
        fail_on = (lambda i: i % fail_every == 0) if fail_every else None
        return caption_client.MockCaptionClient(fail_on=fail_on)
    endpoint = settings.resolve(args.endpoint, "caption_endpoint", caption_client.ENV_ENDPOINT)
    model = settings.resolve(
        args.model, "caption_model", caption_client.ENV_MODEL, default="internvl2-76b"
    )
    api_key = settings.resolve(None, "caption_api_key", caption_client.ENV_API_KEY, default="")
    if not endpoint:
        raise EvcapError("no caption endpoint configured; pass --endpoint or use --mock")
    return caption_client.HttpCaptionClient(
        endpoint=endpoint, model=model, api_key=api_key, max_in_flight=args.max_in_flight
    )


def cmd_annotate(args, settings: Settings) -> int:
    store = ManifestStore.load(args.manifest)
    client = _caption_client_from(args, settings)
    summary = caption_engine.run_annotation(
        store, client, max_in_flight=args.max_in_flight, seed=args.seed
    )
    print(json.dumps(summary))
    return 0


def cmd_qa_sample(args, settings: Settings) -> int:
    store = ManifestStore.load(args.manifest)
    sampled = caption_engine.qa_sample(store, per_class=args.per_class, seed=args.seed)
    print(json.dumps({"sampled": len(sampled), "ids": [r.id for r in sampled]}))
    return 0


def cmd_serve(args, settings: Settings) -> int:
    store = ManifestStore.load(args.manifest)
    client = _caption_client_from(args, settings)
    handle = serve_review_api(
        store, bind=args.bind, client=client, static_dir=args.static, seed=args.seed
    )
    print(f"review service on http://{handle.host}:{handle.port}", file=sys.stderr)
    try:
        while handle.thread.is_alive():
            handle.thread.join(0.5)
    except KeyboardInterrupt:
        handle.stop()
    return 0


def cmd_mix(args, settings: Settings) -> int:
    manifests = {}
    for spec_item in args.source:
        name, _, path = spec_item.partition("=")
        if not path:
            raise EvcapError(f"--source must look like name=path, got {spec_item!r}")
        manifests[name] = ManifestStore.load(path).records()
    weights = {}
    for spec_item in args.weight:
        name, _, value = spec_item.partition("=")
        if not value:
            raise EvcapError(f"--weight must look like name=value, got {spec_item!r}")
        weights[name] = float(value)
    mix = caption_engine.build_training_mix(
        manifests, caption_engine.MixWeights(weights), args.total, args.seed
    )
    out = sys.stdout
    if args.output:
        out = open(args.output, "w", encoding="utf-8")
    try:
        for record in mix:
            out.write(record.to_json() + "\n")
    finally:
        if args.output:
            out.close()
    return 0


def cmd_train_toy(args, settings: Settings) -> int:
    dataset = align.synthetic_alignment_dataset(
        args.items, frame_size=args.frame_size, vocab_size=args.vocab, seed=args.seed
    )
    input_size = 3 * args.frame_size * args.frame_size
    model = align.init_toy_model(input_size, args.dim, args.vocab, seed=args.seed)
    config = align.AlignConfig(
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
    )
    trained, trajectory = align.train_toy(dataset, config, model)
    out_dir = args.out_dir or "train_out"
    os.makedirs(out_dir, exist_ok=True)
    align.write_loss_csv(trajectory, os.path.join(out_dir, "losses.csv"))
    align.save_checkpoint(trained, os.path.join(out_dir, "params.bin"))
    first = trajectory[0].total if trajectory else float("nan")
    last = trajectory[-1].total if trajectory else float("nan")
    print(f"initial={first:.6f} final={last:.6f} epochs={len(trajectory)}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evcap", description=__doc__)
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomized steps")
    parser.add_argument("--out-dir", dest="out_dir", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_geometry(p):
        p.add_argument("--width", type=int)
        p.add_argument("--height", type=int)

    p = sub.add_parser("convert", help="re-encode an event file as EVT1")
    p.add_argument("input")
    p.add_argument("output")
    add_geometry(p)
    p.set_defaults(fn=cmd_convert)

    p = sub.add_parser("render", help="render a whole stream to one PPM frame")
    p.add_argument("input")
    p.add_argument("-o", "--output", default="frame.ppm")
    add_geometry(p)
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("esr", help="assemble and export a frame bundle")
    p.add_argument("input")
    add_geometry(p)
    p.add_argument("--out-dir", dest="out_dir", default=argparse.SUPPRESS)
    p.add_argument("--n-epsilon", dest="n_epsilon", type=int)
    p.add_argument("--total-events", dest="total_events", type=int)
    p.add_argument("--n-min", dest="n_min", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--tile-size", dest="tile_size", type=int)
    p.set_defaults(fn=cmd_esr)

    p = sub.add_parser("ratios", help="print the adaptive ratio set")
    p.add_argument("n_min", type=int)
    p.add_argument("n_max", type=int)
    p.set_defaults(fn=cmd_ratios)

    p = sub.add_parser("annotate", help="caption pending/regenerating manifest records")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mock", action="store_true", help="use the deterministic mock client")
    p.add_argument("--fail-every", dest="fail_every", type=int)
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--max-in-flight", dest="max_in_flight", type=int, default=4)
    p.set_defaults(fn=cmd_annotate)

    p = sub.add_parser("qa-sample", help="sample captioned records per class for review")
    p.add_argument("--manifest", required=True)
    p.add_argument("--per-class", dest="per_class", type=int, default=5)
    p.set_defaults(fn=cmd_qa_sample)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--manifest", required=True)
    p.add_argument("--bind", default="127.0.0.1:8787")
    p.add_argument("--static", help="directory of review UI assets to serve at /")
    p.add_argument("--mock", action="store_true")
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--max-in-flight", dest="max_in_flight", type=int, default=4)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("mix", help="build a weighted training mix from manifests")
    p.add_argument("--source", action="append", required=True, help="name=manifest-path")
    p.add_argument("--weight", action="append", required=True, help="name=weight")
    p.add_argument("--total", type=int, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_mix)

    p = sub.add_parser("train-toy", help="train the toy alignment model on synthetic data")
    p.add_argument("--out-dir", dest="out_dir", default=argparse.SUPPRESS)
    p.add_argument("--items", type=int, default=32)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=0.2)
    p.add_argument("--lambda1", type=float, default=1.0)
    p.add_argument("--lambda2", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--vocab", type=int, default=12)
    p.add_argument("--frame-size", dest="frame_size", type=int, default=4)
    p.set_defaults(fn=cmd_train_toy)

    p = sub.add_parser("gradcheck", help="verify analytic gradients against finite differences")
    p.add_argument("--epsilon", type=float, default=1e-5)
    p.add_argument("--dims", type=int, default=6)
    p.add_argument("--vocab", type=int, default=9)
    p.set_defaults(fn=cmd_gradcheck)

    p = sub.add_parser("bench", help="report rendering and bundle throughput")
    p.add_argument("input")
    add_geometry(p)
    p.add_argument("--iterations", type=int, default=3)
    p.add_argument("--n-epsilon", dest="n_epsilon", type=int)
    p.add_argument("--total-events", dest="total_events", type=int)
    p.add_argument("--n-min", dest="n_min", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--tile-size", dest="tile_size", type=int)
    p.set_defaults(fn=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = Settings(args.config)
        return args.fn(args, settings)
    except (EvcapError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
