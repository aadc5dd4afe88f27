"""Command line harness: train / eval / sweep / export.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from .adc import AdcTransfer
from .config import ConfigError, SimConfig, WeightCode, decode_weight, load_config
from .dataset import DatasetError, default_dataset_path, load_dataset, normalize_split
from .multiplier import MultiplierModel, multiply
from .network import NetworkTopology, build_network, evaluate, train
from .sram import fr_deviation_lsb, fr_energy_of

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
SWEEPS = ("A", "alpha-nl", "eta", "fr-energy", "adc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- experiment ----------------------------------------------------------


def make_config(config_path=None, ideal: bool = False, **overrides) -> SimConfig:
    cfg = load_config(config_path) if config_path else SimConfig()
    if ideal:
        overrides["ideal"] = True
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return cfg.replace(**overrides) if overrides else cfg


def topology_for(cfg: SimConfig, n_in: int, n_out: int, hidden: int = 5) -> NetworkTopology:
    return NetworkTopology((n_in, hidden, n_out), cfg.output_activation, cfg.bias)


def run_experiment(cfg: SimConfig, dataset_path=None, seed: int | None = None, epochs: int | None = None):
    """Train on the stratified split and evaluate; returns (report dict, network)."""
    seed = cfg.rng_seed if seed is None else seed
    dataset_path = Path(dataset_path) if dataset_path else default_dataset_path()
    data = load_dataset(dataset_path)
    tr, te = normalize_split(data, seed)
    topo = topology_for(cfg, data.X.shape[1], len(data.classes))
    net = build_network(cfg, topo, np.random.default_rng(seed))
    init_codes = [layer.bca.stored_values().tolist() for layer in net.layers]
    result = train(net, tr.X, tr.targets, epochs=epochs, labels=tr.y)
    train_acc, _, _ = evaluate(net, tr.X, tr.y)
    test_acc, preds, infer_ledger = evaluate(net, te.X, te.y, te.targets)
    n_iter = result.epochs_run * len(tr)
    per_iter = net.ledger.per_decision_summary(n_iter)
    per_dec = infer_ledger.per_decision_summary(len(te))
    report = {
        "config": cfg.as_dict(),
        "seed": seed,
        "dataset": {
            "file": dataset_path.name,
            "sha256": hashlib.sha256(dataset_path.read_bytes()).hexdigest(),
            "classes": list(data.classes),
            "n_train": len(tr),
            "n_test": len(te),
        },
        "topology": list(topo.layer_sizes),
        "epochs_run": result.epochs_run,
        "stopped_early": result.stopped_early,
        "per_epoch": {
            "mean_abs_VE": result.log.mean_abs_VE,
            "train_accuracy": result.log.train_accuracy,
            "energy_J": result.log.energy,
            "delay_s": result.log.delay,
        },
        "final": {
            "train_accuracy_analog": result.analog_train_accuracy,
            "train_accuracy": train_acc,
            "test_accuracy": test_acc,
            "test_predictions": preds.tolist(),
        },
        "initial_codes": init_codes,
        "final_codes": [np.asarray(g).tolist() for g in result.codes],
        "ledger": {
            "training": net.ledger.totals(),
            "per_iteration": vars(per_iter),
            "inference": infer_ledger.totals(),
            "per_decision": vars(per_dec),
        },
    }
    return report, net


def format_codes(net) -> str:
    out = ["# weight codes, 1's complement, MSB first; rows = banks (outputs), columns = inputs\n"]
    for layer in net.layers:
        out.append(f"# layer {layer.index}: {layer.bca.n_bank} banks x {layer.bca.n_col} columns\n")
        for row in layer.bca.codes():
            out.append(" ".join(str(c) for c in row) + "\n")
    return "".join(out)


def parse_codes(text: str) -> list[np.ndarray]:
    layers: list[list[list[int]]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if line.startswith("# layer"):
            layers.append([])
            continue
        if not line or line.startswith("#"):
            continue
        if not layers:
            raise ValueError(f"line {lineno}: code row before any '# layer' header")
        try:
            layers[-1].append([decode_weight(WeightCode.from_string(tok)) for tok in line.split()])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    grids = [np.array(rows, dtype=int) for rows in layers]
    if not grids or any(g.ndim != 2 for g in grids):
        raise ValueError("weights file has no layers or ragged rows")
    return grids


def metrics_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epoch", "mean_abs_VE_V", "train_accuracy", "energy_J", "delay_s"])
    pe = report["per_epoch"]
    for i, row in enumerate(zip(pe["mean_abs_VE"], pe["train_accuracy"], pe["energy_J"], pe["delay_s"])):
        w.writerow([i + 1, *(repr(float(v)) for v in row)])
    return buf.getvalue()


def phase_csv(totals: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["phase", "energy_J", "delay_s", "count"])
    for phase, v in totals["by_phase"].items():
        w.writerow([phase, repr(v["energy"]), repr(v["delay"]), v["count"]])
    return buf.getvalue()


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    p = out / name
    p.write_text(text, encoding="utf-8")
    return p


# -- sweeps --------------------------------------------------------------


def sweep_rows(kind: str, cfg: SimConfig, dataset_path=None, seed: int = 0, epochs: int | None = None):
    if kind == "A":
        header = ["A", "worst_case_error_V", "half_inverse_A_V"]
        rows = []
        for a in (5.0, 10.0, 20.0, 40.0, 80.0, 100.0):
            m = MultiplierModel(A=a)
            rows.append([a, abs(float(multiply(m, 1.0, 1.0)) - 1.0), 1.0 / (2 * a)])
        return header, rows
    if kind == "alpha-nl":
        header = ["alpha_nl", "fr_deviation_lsb"]
        return header, [[a, fr_deviation_lsb(a, cfg.B_W)] for a in np.round(np.linspace(0.0, 0.05, 11), 6)]
    if kind == "fr-energy":
        header = ["weight_code", "fr_energy_J"]
        return header, [[w, float(fr_energy_of(w, cfg))] for w in range(2**cfg.B_W)]
    if kind == "adc":
        header = ["lower_edge_V", "code", "value_V"]
        adc = AdcTransfer.from_config(cfg)
        return header, [[e, str(c), decode_weight(c) * adc.V_res] for e, c in adc.transfer_curve()]
    if kind == "eta":
        header = ["eta", "train_accuracy", "test_accuracy", "epochs_run"]
        rows = []
        for eta in (0.02, 0.05, 0.1, 0.2):
            rep, _ = run_experiment(cfg.replace(eta=eta), dataset_path, seed, epochs)
            rows.append([eta, rep["final"]["train_accuracy_analog"], rep["final"]["test_accuracy"], rep["epochs_run"]])
        return header, rows
    raise UsageError(f"unknown sweep {kind!r}; choose from {', '.join(SWEEPS)}")


def rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


# -- commands ------------------------------------------------------------


def cmd_train(args) -> int:
    cfg = make_config(args.config, args.ideal)
    t0 = time.perf_counter()
    report, net = run_experiment(cfg, args.dataset, args.seed, args.epochs)
    wall = time.perf_counter() - t0
    out = Path(args.out)
    _write(out, "run.json", dump_json(report))
    _write(out, "metrics.csv", metrics_csv(report))
    _write(out, "weights.txt", format_codes(net))
    _write(out, "ledger.csv", net.ledger.to_csv())
    _write(out, "timing.json", dump_json({"wall_clock_s": wall}))
    f = report["final"]
    print(f"epochs={report['epochs_run']} train_acc={f['train_accuracy_analog']:.4f} "
          f"deployed_train_acc={f['train_accuracy']:.4f} test_acc={f['test_accuracy']:.4f} wall={wall:.1f}s")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = make_config(args.config, args.ideal)
    weights = Path(args.weights) if args.weights else Path(args.out) / "weights.txt"
    if not weights.is_file():
        raise FileNotFoundError(f"weights file not found: {weights} (run 'train' first or pass --weights)")
    grids = parse_codes(weights.read_text(encoding="utf-8"))
    data = load_dataset(args.dataset or default_dataset_path())
    seed = cfg.rng_seed if args.seed is None else args.seed
    _, te = normalize_split(data, seed)
    topo = topology_for(cfg, data.X.shape[1], len(data.classes), hidden=grids[0].shape[0])
    net = build_network(cfg, topo)
    net.write_codes(grids)
    acc, preds, ledger = evaluate(net, te.X, te.y, te.targets)
    s = ledger.per_decision_summary(len(te))
    _write(Path(args.out), "eval.json", dump_json({"test_accuracy": acc, "predictions": preds.tolist(),
                                                    "per_decision": vars(s), "seed": seed}))
    print(f"test_acc={acc:.4f} energy/decision={s.energy:.4e} J delay/decision={s.delay:.4e} s")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.sweep:
        raise UsageError(f"sweep needs --sweep {{{','.join(SWEEPS)}}}")
    cfg = make_config(args.config, args.ideal)
    seed = cfg.rng_seed if args.seed is None else args.seed
    header, rows = sweep_rows(args.sweep, cfg, args.dataset, seed, args.epochs)
    p = _write(Path(args.out), "sweep.csv", rows_csv(header, rows))
    print(f"wrote {len(rows)} rows to {p}")
    return EXIT_OK


def cmd_export(args) -> int:
    src = Path(args.report) if args.report else Path(args.out) / "run.json"
    if not src.is_file():
        raise FileNotFoundError(f"report not found: {src}")
    report = json.loads(src.read_text(encoding="utf-8"))
    out = Path(args.out)
    _write(out, "metrics.csv", metrics_csv(report))
    _write(out, "ledger_phases.csv", phase_csv(report["ledger"]["training"]))
    print(f"exported {src} to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="imcsim", description="In-memory MLP training simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn, help_ in (("train", cmd_train, "train and write run.json, metrics.csv, weights.txt"),
                            ("eval", cmd_eval, "evaluate a weight snapshot on the test split"),
                            ("sweep", cmd_sweep, "write a parameter sweep to sweep.csv"),
                            ("export", cmd_export, "convert run.json into plot-ready CSV")):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--dataset", help="CSV with 4 feature columns and a label (default: bundled Iris)")
        sp.add_argument("--seed", type=int, help="split/shuffle/init seed (default: rng_seed from config)")
        sp.add_argument("--epochs", type=int, help="epoch cap (default: epochs from config)")
        sp.add_argument("--out", default="runs", help="output directory (default: runs)")
        sp.add_argument("--ideal", action="store_true", help="use ideal multipliers")
        if name == "sweep":
            sp.add_argument("--sweep", choices=SWEEPS)
        if name == "eval":
            sp.add_argument("--weights", help="weights.txt snapshot (default: OUT/weights.txt)")
        if name == "export":
            sp.add_argument("--report", help="run.json to convert (default: OUT/run.json)")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.epochs is not None and args.epochs < 1:
            raise UsageError("--epochs must be >= 1")
        if args.config and not Path(args.config).is_file():
            raise UsageError(f"config file not found: {args.config}")
        if args.dataset and not Path(args.dataset).is_file():
            raise UsageError(f"dataset file not found: {args.dataset}")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, DatasetError, FileNotFoundError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
