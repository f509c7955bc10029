"""``ergolab`` command line.

Process specs::

    iid:P  markov:FILE  walk:FILE  renewal:FILE  rotation:FILE  spliced:FILE
    example2  period2  walk  rotation  mixture

Exit status: 0 success, 1 domain failure (diagnosis on stderr), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .errors import ErgolabError
from .process import MarkovChainSpec, MarkovHandle, MixtureHandle, as_word, word_str

SCHEMA = "ergolab.cli/1"


def _version():
    from . import __version__

    return __version__


class UsageError(Exception):
    pass


# ------------------------------------------------------------ process specs


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def parse_process(spec: str):
    """Turn a process spec string into a handle."""
    from . import generators as g
    from .rotation import RotationParams, rotation_process

    kind, _, arg = spec.partition(":")
    if kind == "iid":
        try:
            p = float(arg)
        except ValueError:
            raise UsageError(f"iid needs a probability, got {arg!r}") from None
        return g.iid_bernoulli(p)
    if kind == "example2" and not arg:
        return g.example2_indicator()
    if kind == "period2" and not arg:
        return g.period2_chain()
    if kind == "walk" and not arg:
        return g.walk_chain_process()
    if kind == "rotation" and not arg:
        return rotation_process()
    if kind == "mixture" and not arg:
        return MixtureHandle([g.iid_bernoulli(0.2), g.iid_bernoulli(0.8)], [0.5, 0.5])
    if not arg:
        raise UsageError(f"unknown process spec {spec!r}")
    obj = _load_json(arg)
    if kind == "markov":
        return MarkovHandle(MarkovChainSpec.from_json(obj.get("chain", obj)))
    if kind == "walk":
        return g.walk_chain_process(g.WalkChainLabeling(**obj))
    if kind == "renewal":
        return g.renewal_process(g.RenewalSpec(tuple(obj["masses"]), obj.get("tail_p")))
    if kind == "rotation":
        return rotation_process(RotationParams(**obj))
    if kind == "spliced":
        return _spliced_from_json(obj)
    raise UsageError(f"unknown process kind {kind!r}")


def _spliced_from_json(obj):
    from .splice import SplicedHandle, SyncWord, TypicalWord

    w = obj["w"]
    u = obj["u"]
    tw = TypicalWord(w["w"], w["N"], w["delta"], w["achieved_discrepancy"], w.get("method", "sample"))
    sw = SyncWord(u["u"], len(w["w"]), u["counting_bound"], u["candidates_tried"], u.get("m_increase", 0))
    y = SplicedHandle(parse_process(obj.get("z_spec", "rotation")), tw, sw)
    y.verification = obj.get("verification", {})
    return y


# ------------------------------------------------------------------ output


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj: dict, out: str | None):
    _emit(json.dumps({"schema": SCHEMA, **obj}, indent=2, sort_keys=True) + "\n", out)


def _read_word(path: str) -> np.ndarray:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    return as_word("".join(text.split()))


def _jobs(args) -> int:
    if args.jobs is not None:
        return max(1, args.jobs)
    env = os.environ.get("ERGOLAB_JOBS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise UsageError(f"ERGOLAB_JOBS must be an integer, got {env!r}") from None


# -------------------------------------------------------------- subcommands


def cmd_gen(args):
    h = parse_process(args.spec)
    x = h.sample(args.length, args.seed)
    _emit(word_str(x) + "\n", args.out)


def cmd_dims(args):
    h = parse_process(args.spec)
    d = h.dims(args.n)
    if args.format == "csv":
        rows = ["word,prob"] + [f"{w},{p!r}" for w, p in d.as_dict().items()]
        _emit("\n".join(rows) + "\n", args.out)
    else:
        _emit_json({"spec": args.spec, "dims": d.to_json()}, args.out)


def cmd_close(args):
    from .markov_closure import close_to_markov

    res = close_to_markov(parse_process(args.spec), args.N)
    _emit_json({"spec": args.spec, "N": args.N, **res.to_json()}, args.out)


def cmd_splice(args):
    from .splice import build_splice

    source = parse_process(args.spec)
    z = parse_process(args.z)
    y = build_splice(source, args.N, args.delta, z=z, seed=args.seed, method=args.method)
    _emit_json({
        "spec": args.spec, "z_spec": args.z, "N": args.N, "delta": args.delta,
        "seed": args.seed, **y.to_json(),
    }, args.out)


def cmd_metrics(args):
    from .metrics import ergodicity_certificate, entropy_rate_plugin

    if (args.spec is None) == (args.input is None):
        raise UsageError("give exactly one of --spec or --in")
    if args.certificate:
        if args.spec is None:
            raise UsageError("--certificate needs --spec")
        stages = []
        for part in args.certificate.split(","):
            k, N, eps = part.split(":")
            stages.append((int(k), int(N), float(eps)))
        cert = ergodicity_certificate(parse_process(args.spec), stages, args.pairs, args.seed)
        _emit_json({"spec": args.spec, "certificate": cert.to_json()}, args.out)
        return 0 if cert.passed else 1
    x = _read_word(args.input) if args.input else parse_process(args.spec).sample(args.length, args.seed)
    buf = [["k", "h_k"]]
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for k in range(args.kmax + 1):
            buf.append([k, repr(entropy_rate_plugin(x, k))])
    if args.out:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh).writerows(buf)
    else:
        csv.writer(sys.stdout).writerows(buf)
    return 0


def cmd_classify(args):
    from .classifiers import builtin_classifier

    c = builtin_classifier(args.classifier)
    try:
        print(c.classify(_read_word(args.input)).value)
    finally:
        c.close()


def cmd_adversary(args):
    from .adversary import Schedules, run_diagonalization
    from .classifiers import builtin_classifier

    s = Schedules(k_max=args.stages, samples=args.samples, n_cap=args.n_cap)
    c = builtin_classifier(args.classifier)
    t0 = time.perf_counter()
    try:
        report, _ = run_diagonalization(c, s, args.seed, _jobs(args))
    finally:
        c.close()
    # wall-clock goes to stderr so the report itself stays reproducible
    print(f"wall-clock {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    _emit(report.dumps() + "\n", args.out)
    if not report.completed:
        print(f"stage {report.failure['stage']} failed: {report.failure['diagnosis']}", file=sys.stderr)
        return 1
    return 0


def cmd_replay(args):
    from .adversary import replay
    from .classifiers import builtin_classifier

    stored = _load_json(args.report)
    c = builtin_classifier(args.classifier or stored["classifier"])
    try:
        same, _ = replay(stored, c, _jobs(args))
    finally:
        c.close()
    print("IDENTICAL" if same else "MISMATCH")
    return 0 if same else 1


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ergolab", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"ergolab {_version()}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("gen", cmd_gen, "sample a path as a 0/1 line")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--length", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")

    sp = add("dims", cmd_dims, "exact n-block law")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--out")

    sp = add("close", cmd_close, "order-N Markov closure")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--out")

    sp = add("splice", cmd_splice, "splice a zero-entropy process into a source")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--z", default="rotation")
    sp.add_argument("--method", choices=("sample", "rotor"), default="sample")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")

    sp = add("metrics", cmd_metrics, "plug-in entropy CSV or ergodicity certificate")
    sp.add_argument("--spec")
    sp.add_argument("--in", dest="input")
    sp.add_argument("--length", type=int, default=100_000)
    sp.add_argument("--kmax", type=int, default=8)
    sp.add_argument("--certificate", help="stages as k:N:eps,k:N:eps,...")
    sp.add_argument("--pairs", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")

    sp = add("classify", cmd_classify, "run a classifier on a 0/1 file")
    sp.add_argument("--classifier", required=True)
    sp.add_argument("--in", dest="input", required=True)

    sp = add("adversary", cmd_adversary, "diagonalize against a classifier")
    sp.add_argument("--classifier", required=True)
    sp.add_argument("--stages", type=int, default=4)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--n-cap", type=int, default=1 << 20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--out")

    sp = add("replay", cmd_replay, "re-run a stored adversary report and compare")
    sp.add_argument("--report", required=True)
    sp.add_argument("--classifier", help="override the stored classifier spec")
    sp.add_argument("--jobs", type=int)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rc = args.fn(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ergolab: error: {exc}", file=sys.stderr)
        return 2
    except (ErgolabError, ValueError) as exc:
        print(f"ergolab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
