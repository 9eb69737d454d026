"""Command-line interface.

The CLI is a thin client of the HTTP API: every command issues requests
against either a remote server (``--server URL``) or an in-process instance
of the FastAPI app, so the wire format is exercised either way.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click
import httpx

from .config import PRESETS, load_config, preset_config


class ApiClient:
    """HTTP client that targets a running server or the in-process app."""

    def __init__(self, server: str | None = None):
        self.server = server

    def request(self, method: str, path: str, payload: dict | None = None) -> dict:
        async def _go():
            if self.server:
                transport = None
                base = self.server.rstrip("/")
            else:
                from .service.app import app

                transport = httpx.ASGITransport(app=app)
                base = "http://mmwave-ce.local"
            async with httpx.AsyncClient(transport=transport, base_url=base, timeout=None) as client:
                resp = await client.request(method, path, json=payload)
                if resp.status_code >= 400:
                    try:
                        detail = resp.json().get("detail", resp.text)
                    except Exception:
                        detail = resp.text
                    raise click.ClickException(f"{path} failed ({resp.status_code}): {detail}")
                return resp.json()

        return asyncio.run(_go())


def _resolve_config(config_path, preset, seed) -> dict:
    if config_path and preset:
        raise click.UsageError("pass either --config or --preset, not both")
    if config_path:
        try:
            cfg = load_config(config_path)
        except (ValueError, OSError) as e:
            raise click.ClickException(str(e))
    elif preset:
        try:
            cfg = preset_config(preset)
        except ValueError as e:
            raise click.ClickException(str(e))
    else:
        raise click.UsageError("one of --config or --preset is required")
    if seed is not None:
        cfg = cfg.with_updates(base_seed=seed)
    return cfg.to_dict()


@click.group()
def main():
    """Beamspace mmWave channel estimation simulator."""


server_option = click.option("--server", default=None, metavar="URL",
                             help="Remote API server; default runs the app in process.")
config_option = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                             default=None, help="Experiment config JSON.")
preset_option = click.option("--preset", default=None, help="Named preset (see `presets`).")
seed_option = click.option("--seed", type=int, default=None, help="Override the base seed.")


@main.command()
@config_option
@preset_option
@seed_option
@click.option("--point", type=float, default=None, help="Sweep-axis value (default: first).")
@click.option("--pipeline", default=None, help="Run a single pipeline instead of all configured.")
@server_option
def run(config_path, preset, seed, point, pipeline, server):
    """Run a single sweep point and print the trial results as JSON."""
    cfg = _resolve_config(config_path, preset, seed)
    payload = {"config": cfg, "point": point, "pipeline": pipeline, "seed": seed}
    out = ApiClient(server).request("POST", "/trials/run", payload)
    click.echo(json.dumps(out["results"], indent=2))


@main.command()
@config_option
@preset_option
@seed_option
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="results",
              help="Directory for trials.csv and aggregates.csv.")
@click.option("--workers", type=int, default=None, help="Parallel trial workers.")
@server_option
def sweep(config_path, preset, seed, out_dir, workers, server):
    """Run the configured sweep; write trial and aggregate CSVs."""
    cfg = _resolve_config(config_path, preset, seed)
    out = ApiClient(server).request("POST", "/sweeps/run", {"config": cfg, "workers": workers})
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    (out_path / "trials.csv").write_text(out["trials_csv"])
    (out_path / "aggregates.csv").write_text(out["aggregates_csv"])
    summary = {
        "name": out["name"],
        "num_trials": out["num_trials"],
        "elapsed_seconds": round(out["elapsed_seconds"], 3),
        "trials_csv": str(out_path / "trials.csv"),
        "aggregates_csv": str(out_path / "aggregates.csv"),
    }
    click.echo(json.dumps(summary, indent=2))


@main.command("ric-check")
@click.option("--rows", type=int, default=16, help="Gaussian test matrix rows.")
@click.option("--cols", type=int, default=32, help="Gaussian test matrix columns.")
@click.option("--k", type=int, default=2, help="Sparsity level for the constant.")
@click.option("--mode", type=click.Choice(["exhaustive", "sampled"]), default="exhaustive")
@click.option("--trials", type=int, default=1000, help="Random supports in sampled mode.")
@click.option("--seed", type=int, default=0)
@click.option("--real", "real_valued", is_flag=True, help="Real Gaussian entries instead of complex.")
@click.option("--matrix-json", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Explicit matrix as JSON {\"re\": [[..]], \"im\": [[..]]}.")
@server_option
def ric_check(rows, cols, k, mode, trials, seed, real_valued, matrix_json, server):
    """Estimate a restricted isometry constant and print the verdict as JSON."""
    if matrix_json:
        data = json.loads(Path(matrix_json).read_text())
        matrix = {"kind": "explicit", "re": data["re"], "im": data.get("im")}
    else:
        matrix = {
            "kind": "gaussian", "rows": rows, "cols": cols,
            "seed": seed, "complex_valued": not real_valued,
        }
    payload = {"matrix": matrix, "k": k, "mode": mode, "n_trials": trials, "seed": seed}
    out = ApiClient(server).request("POST", "/ric/check", payload)
    click.echo(json.dumps(out, indent=2))


@main.command()
@server_option
def presets(server):
    """List named experiment presets."""
    out = ApiClient(server).request("GET", "/presets")
    for p in out["presets"]:
        click.echo(f"{p['name']:22s} {p['description']}")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Start the HTTP API server."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
