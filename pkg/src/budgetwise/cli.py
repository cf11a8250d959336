"""Command-line entry point: simulation sweeps, surface tools, advisor server."""
from __future__ import annotations

import csv
import json
import os
import socket
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import click

from .campaign import (
    FIXED_SPLITS,
    CampaignConfig,
    GPConfig,
    RESULT_COLUMNS,
    SweepTask,
    aggregate,
    sweep,
)
from .strategy import CostModel, Strategy, cost
from .surfaces import (
    PerformanceSurface,
    SurfaceSchemaError,
    load_surface,
    preset_surface,
    spline_surface,
)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def resolve_surface(source: str) -> PerformanceSurface:
    """Resolve a --surface argument: either preset:<name> or a grid file path."""
    if source.startswith("preset:"):
        return preset_surface(source.removeprefix("preset:"))
    return spline_surface(load_surface(source))


def _parse_pair(raw: str, name: str) -> tuple[int, int]:
    parts = raw.split(",")
    try:
        values = [int(p) for p in parts]
    except ValueError:
        _fail(f"{name} must be an integer or 'c,s' pair, got {raw!r}")
    if len(values) == 1:
        return values[0], values[0]
    if len(values) == 2:
        return values[0], values[1]
    _fail(f"{name} takes at most two comma-separated values, got {raw!r}")
    raise AssertionError  # unreachable


@click.group()
def main() -> None:
    """Adaptive annotation-budget allocation toolkit."""


@main.command("simulate")
@click.option("--surface", "surface_src", default=None, help="preset:<name> or surface grid file")
@click.option("--budget", type=float, default=None)
@click.option("--steps", type=int, default=None)
@click.option("--alpha-c", type=float, default=None)
@click.option("--alpha-s", "alpha_s_raw", default=None, help="value or comma list, e.g. 5,12,25,50")
@click.option("--seeds", type=int, default=None, help="number of seeds (0..N-1)")
@click.option("--baselines", type=click.Choice(["all", "none"]), default=None)
@click.option("--m-count", type=int, default=None)
@click.option("--noise-std", type=float, default=None)
@click.option("--strides", default=None, help="stride or 'c,s' pair")
@click.option("--spend-remainder", is_flag=True, default=None)
@click.option("--jobs", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--trajectories-dir", type=click.Path(file_okay=False), default=None)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
def cmd_simulate(**kwargs) -> None:
    """Run the adaptive method and baselines against a surface; write a CSV."""
    file_cfg: dict = {}
    if kwargs["config_path"]:
        try:
            file_cfg = tomllib.loads(Path(kwargs["config_path"]).read_text())
        except (OSError, tomllib.TOMLDecodeError) as exc:
            _fail(f"cannot read config {kwargs['config_path']}: {exc}")

    def opt(flag_key: str, cfg_key: str, default):
        if kwargs.get(flag_key) is not None:
            return kwargs[flag_key]
        return file_cfg.get(cfg_key, default)

    surface_src = opt("surface_src", "surface", None)
    if not surface_src:
        _fail("a surface is required (--surface preset:<name> or a grid file)")
    budget = float(opt("budget", "budget", 5000.0))
    steps = int(opt("steps", "steps", 8))
    alpha_c = float(opt("alpha_c", "alpha_c", 1.0))
    alpha_s_raw = str(opt("alpha_s_raw", "alpha_s", "12"))
    n_seeds = int(opt("seeds", "seeds", 3))
    baselines = opt("baselines", "baselines", "all")
    m_count = int(opt("m_count", "m_count", 20))
    noise_std = float(opt("noise_std", "noise_std", 0.005))
    strides_raw = str(opt("strides", "strides", "1"))
    spend_remainder = bool(opt("spend_remainder", "spend_remainder", False))
    jobs = int(opt("jobs", "jobs", 1))
    out_path = opt("out", "out", None)
    traj_dir = opt("trajectories_dir", "trajectories_dir", None)

    if steps < 1:
        _fail(f"steps must be >= 1, got {steps}")
    if budget <= 0:
        _fail(f"budget must be positive, got {budget}")
    if alpha_c <= 0:
        _fail(f"alpha-c must be positive, got {alpha_c}")
    if n_seeds < 1:
        _fail(f"seeds must be >= 1, got {n_seeds}")
    if m_count < 1:
        _fail(f"m-count must be >= 1, got {m_count}")
    try:
        alpha_s_values = [float(v) for v in alpha_s_raw.split(",")]
    except ValueError:
        _fail(f"alpha-s must be a number or comma list, got {alpha_s_raw!r}")
    if any(a <= 0 for a in alpha_s_values):
        _fail(f"alpha-s values must be positive, got {alpha_s_raw!r}")
    strides = _parse_pair(strides_raw, "strides")
    if strides[0] < 1 or strides[1] < 1:
        _fail(f"strides must be >= 1, got {strides_raw!r}")

    try:
        surface = resolve_surface(surface_src)
    except (FileNotFoundError, SurfaceSchemaError, ValueError) as exc:
        _fail(str(exc))

    seeds = tuple(range(n_seeds))
    tasks: list[SweepTask] = []
    for alpha_s in alpha_s_values:
        model = CostModel(alpha_c=alpha_c, alpha_s=alpha_s, budget=budget)
        initial = _default_initial_strategy(model, file_cfg)
        config = CampaignConfig(
            cost_model=model,
            initial_strategy=initial,
            total_steps=steps,
            m_count=m_count,
            gp=GPConfig(
                learning_rate=float(file_cfg.get("gp_learning_rate", 0.1)),
                iterations=int(file_cfg.get("gp_iterations", 200)),
            ),
            noise_std=noise_std,
            strides=strides,
            spend_remainder=spend_remainder,
        )
        tasks.append(SweepTask("adaptive", config, surface, seeds))
        if baselines == "all":
            for split in FIXED_SPLITS:
                tasks.append(SweepTask(f"fixed-{split:.2f}", config, surface, seeds))
            tasks.append(SweepTask("estimated-best-fixed", config, surface, seeds))

    rows = sweep(tasks, jobs=jobs, collect_trajectories=traj_dir is not None)

    if traj_dir:
        Path(traj_dir).mkdir(parents=True, exist_ok=True)
        for row in rows:
            traj = row.pop("_trajectory", None)
            if traj is not None:
                name = f"{row['method']}_a{row['alpha_s']:g}_seed{row['seed']}.json"
                (Path(traj_dir) / name).write_text(json.dumps(traj, indent=2) + "\n")
    else:
        for row in rows:
            row.pop("_trajectory", None)

    if out_path:
        with open(out_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)

    click.echo(f"{len(rows)} runs completed")
    click.echo(f"{'method':<22}{'alpha_s':>8}{'budget':>10}{'mean':>10}{'std':>10}{'runs':>6}")
    for agg in aggregate(rows):
        click.echo(
            f"{agg['method']:<22}{agg['alpha_s']:>8g}{agg['budget']:>10g}"
            f"{agg['mean_score']:>10.4f}{agg['std_score']:>10.4f}{agg['runs']:>6}"
        )
    errored = [row for row in rows if row["error"]]
    for row in errored:
        click.echo(f"failed: {row['method']} seed {row['seed']}: {row['error']}", err=True)
    sys.exit(2 if errored else 0)


def _default_initial_strategy(model: CostModel, file_cfg: dict) -> Strategy:
    """Initial (C0, S0): configured explicitly, else ~4% of budget per modality."""
    c0 = file_cfg.get("initial_c")
    s0 = file_cfg.get("initial_s")
    if c0 is None:
        c0 = max(1, int(0.04 * model.budget / model.alpha_c))
    if s0 is None:
        s0 = int(0.04 * model.budget / model.alpha_s)
    initial = Strategy(int(c0), int(s0))
    if cost(initial, model) > model.budget:
        _fail(
            f"initial strategy ({initial.c}, {initial.s}) costs "
            f"{cost(initial, model)}, over budget {model.budget}"
        )
    return initial


@main.command("surface")
@click.argument("source")
@click.option("--sample", default=None, help="emit a dense NxM sampled grid, e.g. 50x50")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_surface(source: str, sample: str | None, out: str | None) -> None:
    """Validate a surface and print knot statistics."""
    try:
        surface = resolve_surface(source)
    except FileNotFoundError as exc:
        _fail(str(exc))
    except SurfaceSchemaError as exc:
        _fail(f"invalid surface ({exc.field}): {exc}")
    except ValueError as exc:
        _fail(str(exc))

    click.echo(f"name: {surface.name}")
    click.echo(f"domain: c in [0, {surface.max_c}], s in [0, {surface.max_s}]")
    grid = getattr(surface, "grid", None)
    if grid is not None:
        import numpy as np

        scores = np.asarray(grid.scores)
        click.echo(f"knots: {len(grid.c_knots)} x {len(grid.s_knots)}")
        click.echo(f"score range: [{scores.min():.4f}, {scores.max():.4f}]")

    if sample:
        try:
            nc, ns = (int(v) for v in sample.lower().split("x"))
        except ValueError:
            _fail(f"--sample expects NxM, got {sample!r}")
        cs = [round(i * surface.max_c / (nc - 1)) for i in range(nc)] if nc > 1 else [0]
        ss = [round(j * surface.max_s / (ns - 1)) for j in range(ns)] if ns > 1 else [0]
        doc = {
            "name": surface.name,
            "c": cs,
            "s": ss,
            "scores": [[surface.evaluate(c, s) for c in cs] for s in ss],
        }
        payload = json.dumps(doc)
        if out:
            Path(out).write_text(payload + "\n")
        else:
            click.echo(payload)
    sys.exit(0)


@main.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8787)
@click.option("--session-dir", default=None, help="defaults to $BUDGETWISE_SESSION_DIR or ./sessions")
@click.option("--ui-dir", default=None, help="static dashboard to mount at /ui (defaults to ./frontend/dist when present)")
def cmd_serve(host: str, port: int, session_dir: str | None, ui_dir: str | None) -> None:
    """Start the advisor HTTP service."""
    import uvicorn

    from .service import create_app

    session_dir = session_dir or os.environ.get("BUDGETWISE_SESSION_DIR") or "./sessions"
    try:
        Path(session_dir).mkdir(parents=True, exist_ok=True)
        probe = Path(session_dir) / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        _fail(f"session directory {session_dir} is not writable: {exc}")

    try:
        with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
            sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            sock.bind((host, port))
    except OSError as exc:
        _fail(f"cannot bind {host}:{port}: {exc}")

    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    app = create_app(session_dir, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
