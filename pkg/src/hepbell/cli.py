"""Command-line driver: runs every analysis from flags or a JSON config and
writes schema-validatable JSON/CSV reports with the resolved configuration
embedded for provenance."""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import lhv, mesonlab, photon3, spin1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING_INPUT = 3
EXIT_INSUFFICIENT_STATS = 4

_PI = math.pi


class AngleSyntaxError(ValueError):
    def __init__(self, token: str):
        super().__init__(f"malformed angle token {token!r}")
        self.token = token


def parse_angle(token: str) -> float:
    """Parse radians or exact fractions of pi: '0.5', 'pi', '3pi/8', '-pi/2'."""
    text = str(token).strip().lower().replace(" ", "")
    if not text:
        raise AngleSyntaxError(token)
    if "pi" in text:
        head, _, tail = text.partition("pi")
        if head in ("", "+", "-"):
            head += "1"
        try:
            value = float(head) * _PI
            if tail:
                if not tail.startswith("/"):
                    raise ValueError
                value /= float(tail[1:])
            return value
        except ValueError:
            raise AngleSyntaxError(token) from None
    try:
        return float(text)
    except ValueError:
        raise AngleSyntaxError(token) from None


def _parse_bool(token: str) -> bool:
    text = str(token).strip().lower()
    if text in ("true", "1", "yes", "on"):
        return True
    if text in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {token!r}")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run parameters; flags override config-file fields."""

    seed: int = 12345
    n_events: int = 1_000_000
    workers: int = 1
    eta_1: float = 1.0
    eta_2: float = 1.0
    background_fraction: float = 0.0
    br_weight: float = 1.0
    m_parent: float = 2.980
    m_vector: float = 1.019461
    settings: tuple[float, float, float, float] = (0.0, 3 * _PI / 4, 3 * _PI / 8, _PI / 8)
    bin_width: float = 2 * _PI / 64
    output_dir: str = "."

    def detector(self) -> mesonlab.DetectorModel:
        return mesonlab.DetectorModel(
            eta_1=self.eta_1,
            eta_2=self.eta_2,
            background_fraction=self.background_fraction,
            br_weight=self.br_weight,
        )

    def kinematics(self) -> mesonlab.KinematicsConfig:
        return mesonlab.KinematicsConfig(m_parent=self.m_parent, m_vector=self.m_vector)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["settings"] = [float(v) for v in self.settings]
        return out


def _load_config(path: str | None) -> RunConfig:
    config = RunConfig()
    if path is None:
        return config
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"config file not found: {file_path}")
    data = json.loads(file_path.read_text())
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    if "settings" in data:
        data["settings"] = tuple(
            parse_angle(v) if isinstance(v, str) else float(v) for v in data["settings"]
        )
    if "bin_width" in data and isinstance(data["bin_width"], str):
        data["bin_width"] = parse_angle(data["bin_width"])
    return replace(config, **data)


def _apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates = {}
    for flag, field_name in (
        ("n", "n_events"),
        ("seed", "seed"),
        ("workers", "workers"),
        ("eta1", "eta_1"),
        ("eta2", "eta_2"),
        ("background", "background_fraction"),
        ("br_weight", "br_weight"),
        ("m_parent", "m_parent"),
        ("m_vector", "m_vector"),
        ("bin_width", "bin_width"),
        ("settings", "settings"),
        ("output_dir", "output_dir"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            updates[field_name] = value
    return replace(config, **updates) if updates else config


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_json_ready(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_report(config: RunConfig, kind: str, payload: dict, out: str | None) -> Path:
    directory = Path(config.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    path = Path(out) if out else directory / f"{kind}.json"
    document = {"kind": kind, "config": config.to_dict()}
    document.update(payload)
    path.write_text(json.dumps(_json_ready(document), indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")
    return path


def angle(token: str) -> float:
    """argparse type for a single angle; accepts 'Npi/M' fractions."""
    return parse_angle(token)


def four_angles(text: str) -> tuple[float, float, float, float]:
    """argparse type for a comma-separated list of four angles."""
    tokens = [t for t in text.split(",") if t.strip()]
    if len(tokens) != 4:
        raise AngleSyntaxError(text)
    return tuple(parse_angle(t) for t in tokens)


def _cmd_tripartite(config: RunConfig, args: argparse.Namespace) -> int:
    try:
        labeling = tuple(int(v) - 1 for v in args.labeling.split(","))
    except ValueError:
        raise ValueError(f"--labeling must be three integers, got {args.labeling!r}")
    if sorted(labeling) != [0, 1, 2]:
        raise ValueError(f"--labeling must be a permutation of 1,2,3, got {args.labeling!r}")
    fixed = photon3.ch_value_3gamma(labeling=labeling, symmetrized=False)
    symmetrized = photon3.ch_value_3gamma(labeling=labeling, symmetrized=True)
    selected = symmetrized if args.symmetrized else fixed
    tangle = photon3.three_tangle(photon3.make_ortho_ps_state())
    lhv_max, _ = lhv.max_ch_3gamma_lhv()
    payload = {
        "labeling": [v + 1 for v in labeling],
        "symmetrized": args.symmetrized,
        "probabilities": photon3.probability_summary(labeling),
        "ch_fixed": fixed.to_dict(),
        "ch_symmetrized": symmetrized.to_dict(),
        "value": selected.value,
        "violated": selected.violated,
        "lhv_max": lhv_max,
        "tangle": tangle.to_dict(),
    }
    _write_report(config, "tripartite", payload, args.out)
    return EXIT_OK


def _cmd_hardy(config: RunConfig, args: argparse.Namespace) -> int:
    settings = spin1.HardySettings(args.alpha, args.beta, args.gamma)
    report = spin1.hardy_violation(settings)
    lhv_max, _ = lhv.max_hardy_spin1_lhv()
    payload = {
        "settings": {
            "alpha": settings.alpha,
            "beta": settings.beta,
            "gamma": settings.gamma,
        },
        "report": report.to_dict(),
        "lhv_max": lhv_max,
    }
    if args.optimize:
        best_settings, best_value = spin1.maximize_violation(
            grid_step=args.grid_step, refine_tol=args.refine_tol
        )
        payload["optimum"] = {
            "alpha": best_settings.alpha,
            "beta": best_settings.beta,
            "gamma": best_settings.gamma,
            "value": best_value,
        }
    _write_report(config, "hardy", payload, args.out)
    return EXIT_OK


def _events_out_path(config: RunConfig, out: str | None) -> Path:
    if out:
        return Path(out)
    directory = Path(config.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    return directory / "events.csv"


def _cmd_generate(config: RunConfig, args: argparse.Namespace) -> int:
    events = mesonlab.generate_events(
        config.n_events, config.detector(), seed=config.seed, workers=config.workers
    )
    path = _events_out_path(config, args.out)
    mesonlab.write_events_csv(events, path)
    echo = {"kind": "generate", "config": config.to_dict(), "events_file": str(path)}
    print(json.dumps(_json_ready(echo), sort_keys=True))
    return EXIT_OK


def _read_events(path_text: str) -> mesonlab.EventSample:
    path = Path(path_text)
    if not path.exists():
        raise FileNotFoundError(f"event file not found: {path}")
    return mesonlab.read_events_csv(path)


def _cmd_estimate(config: RunConfig, args: argparse.Namespace) -> int:
    events = _read_events(args.events)
    estimate = mesonlab.estimate_probability(events, bin_width=config.bin_width)
    _write_report(config, "estimate", estimate.to_dict(), args.out)
    return EXIT_OK


def _cmd_chtest(config: RunConfig, args: argparse.Namespace) -> int:
    events = _read_events(args.events)
    report = mesonlab.ch_from_events(
        events, config.settings, det=config.detector(), window=config.bin_width
    )
    payload = {"settings": list(config.settings)}
    payload.update(report.to_dict())
    _write_report(config, "chtest", payload, args.out)
    return EXIT_OK


def _cmd_efficiency(config: RunConfig, args: argparse.Namespace) -> int:
    threshold = mesonlab.efficiency_threshold(search_tol=args.tol)
    eta_grid = [round(0.5 + 0.01 * k, 2) for k in range(51)]
    payload = {
        "threshold": threshold,
        "eta_grid": eta_grid,
        "max_s": [mesonlab.max_s_of_eta(eta) for eta in eta_grid],
    }
    _write_report(config, "efficiency", payload, args.out)
    return EXIT_OK


def _cmd_kinematics(config: RunConfig, args: argparse.Namespace) -> int:
    result = mesonlab.two_body_beta(config.kinematics())
    payload = {
        "beta": result.beta,
        "space_like_ok": result.space_like_ok,
        "beta_min": mesonlab.SPACE_LIKE_BETA_MIN,
    }
    _write_report(config, "kinematics", payload, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hepbell",
        description="Nonlocality tests with entangled states from particle decays.",
    )
    parser.add_argument("--config", help="JSON config file; flags override its fields")
    parser.add_argument("--output-dir", dest="output_dir", help="directory for reports")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tripartite", help="three-photon probabilities, CH value, 3-tangle")
    p.add_argument("--labeling", default="1,2,3", help="photon labeling, e.g. 2,3,1")
    p.add_argument(
        "--symmetrized",
        type=_parse_bool,
        default=True,
        help="use the symmetrized first term (true/false)",
    )
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_tripartite)

    p = sub.add_parser("hardy", help="spin-1 Hardy probabilities and violation")
    p.add_argument("--alpha", type=angle, default=3 * _PI / 8)
    p.add_argument("--beta", type=angle, default=_PI / 4)
    p.add_argument("--gamma", type=angle, default=5 * _PI / 8)
    p.add_argument("--optimize", action="store_true", help="also search for the maximum")
    p.add_argument("--grid-step", dest="grid_step", type=angle, default=_PI / 16)
    p.add_argument("--refine-tol", dest="refine_tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_hardy)

    p = sub.add_parser("generate", help="simulate decays and write the event CSV")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--eta1", type=float)
    p.add_argument("--eta2", type=float)
    p.add_argument("--background", type=float)
    p.add_argument("--br-weight", dest="br_weight", type=float)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_generate)

    p = sub.add_parser("estimate", help="histogram probability estimate from events")
    p.add_argument("--events", required=True)
    p.add_argument("--bin-width", dest="bin_width", type=angle)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_estimate)

    p = sub.add_parser("chtest", help="event-based CH evaluation")
    p.add_argument("--events", required=True)
    p.add_argument(
        "--settings",
        type=four_angles,
        help="four angles t1,t1',t2,t2' (accepts Npi/M)",
    )
    p.add_argument("--eta1", type=float)
    p.add_argument("--eta2", type=float)
    p.add_argument("--bin-width", dest="bin_width", type=angle)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_chtest)

    p = sub.add_parser("efficiency", help="detection-efficiency threshold scan")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_efficiency)

    p = sub.add_parser("kinematics", help="two-body decay speed and space-like flag")
    p.add_argument("--m-parent", dest="m_parent", type=float)
    p.add_argument("--m-vector", dest="m_vector", type=float)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_kinematics)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except AngleSyntaxError as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog}: error: {exc}\n")
    try:
        config = _load_config(args.config)
        config = _apply_overrides(config, args)
        return args.handler(config, args)
    except AngleSyntaxError as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog}: error: {exc}\n")
    except FileNotFoundError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except (mesonlab.InsufficientStatistics, mesonlab.NoData) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT_STATS
    except OSError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except (ValueError, TypeError) as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog}: error: {exc}\n")


if __name__ == "__main__":
    raise SystemExit(main())
