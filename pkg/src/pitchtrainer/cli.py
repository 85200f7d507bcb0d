"""Command-line surface.

Exit codes: 0 success, 1 input error, 2 internal error.
"""

from __future__ import annotations

import json
import socket
import socketserver
import sys
from pathlib import Path

import click

from .audio import AudioFormatError, ingest_wav
from .dsp import DspConfig
from .feedback import FeedbackMode
from .haptics import ActuatorLayout, DeviceSimulator, HapticProtocolError
from .melody import MelodyError, load_melody
from .pipeline import run_trial, score_log, stable_session_id
from .session import SessionLogError, replay
from .stats import GroupedData, StatsInputError, one_way_anova

INPUT_ERRORS = (
    MelodyError,
    AudioFormatError,
    SessionLogError,
    StatsInputError,
    HapticProtocolError,
    FileNotFoundError,
    ValueError,
    KeyError,
)


def _fail_input(e: Exception):
    click.echo(f"error: {e}", err=True)
    sys.exit(1)


def _load_config(path: str | None) -> tuple[DspConfig, ActuatorLayout]:
    if path is None:
        return DspConfig(), ActuatorLayout()
    doc = json.loads(Path(path).read_text())
    return DspConfig(**doc.get("dsp", {})), ActuatorLayout(**doc.get("layout", {}))


def _parse_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    return host or "127.0.0.1", int(port)


@click.group()
def main():
    """Vocal pitch training engine."""


@main.command("run")
@click.option("--melody", "melody_path", required=True, type=click.Path())
@click.option("--mode", type=click.Choice(["sync", "terminal"]), required=True)
@click.option("--input", "input_path", required=True,
              help="WAV file path, or '-' for WAV bytes on stdin")
@click.option("--haptic-addr", default=None, help="host:port for encoded haptic frames")
@click.option("--trigger-addr", default=None, help="host:port for trigger marker bytes")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--session-id", default=None, help="override the content-derived session id")
def run_cmd(melody_path, mode, input_path, haptic_addr, trigger_addr, out_dir,
            config_path, session_id):
    """Run one offline trial from a WAV file and persist the session log."""
    try:
        cfg, layout = _load_config(config_path)
        melody = load_melody(Path(melody_path).read_text())
        if input_path == "-":
            wav_bytes = sys.stdin.buffer.read()
        else:
            wav_bytes = Path(input_path).read_bytes()
        samples = ingest_wav(wav_bytes)
        fb_mode = FeedbackMode(mode)
        sid = session_id or stable_session_id(wav_bytes, melody, fb_mode, cfg)

        sockets = []

        def make_sender(addr):
            if addr is None:
                return None
            s = socket.create_connection(_parse_addr(addr))
            sockets.append(s)
            return s.sendall

        haptic_out = make_sender(haptic_addr)
        trigger_out = make_sender(trigger_addr)

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        log_path = out / f"{sid}.jsonl"
        with log_path.open("w") as sink:
            log = run_trial(samples, melody, fb_mode, cfg, layout,
                            session_id=sid, sink=sink,
                            haptic_out=haptic_out, trigger_out=trigger_out)
        for s in sockets:
            s.close()
        click.echo(json.dumps({"session_id": sid, "log": str(log_path),
                               "score": log.score.to_dict()}))
    except INPUT_ERRORS as e:
        _fail_input(e)


@main.command("score")
@click.argument("log_path", type=click.Path())
def score_cmd(log_path):
    """Replay a session log, re-score it, and print the score report."""
    try:
        log = replay(Path(log_path).read_text())
        rescored = score_log(log)
        if log.score is not None and rescored != log.score:
            click.echo("error: replayed score differs from stored score", err=True)
            sys.exit(2)
        click.echo(json.dumps(rescored.to_dict(), indent=2))
    except INPUT_ERRORS as e:
        _fail_input(e)


@main.command("anova")
@click.option("--metric", required=True, help="value column name (label if CSV uses 'value')")
@click.option("--csv", "csv_path", required=True, type=click.Path())
def anova_cmd(metric, csv_path):
    """One-way ANOVA over a group,value CSV, with Bonferroni post-hoc tests."""
    import csv as csvmod

    try:
        with open(csv_path, newline="") as fh:
            reader = csvmod.DictReader(fh)
            if reader.fieldnames is None or "group" not in reader.fieldnames:
                raise StatsInputError("CSV must have a 'group' column")
            value_col = metric if metric in reader.fieldnames else "value"
            if value_col not in reader.fieldnames:
                raise StatsInputError(f"CSV has neither {metric!r} nor 'value' column")
            groups: dict[str, list[float]] = {}
            for row in reader:
                groups.setdefault(row["group"], []).append(float(row[value_col]))
        result = one_way_anova(GroupedData.from_lists(sorted(groups.items())))

        click.echo(f"one-way ANOVA: {metric}")
        click.echo(f"  F({result.df_between},{result.df_within}) = "
                   f"{result.f_stat:.4f}   p = {result.p_value:.4f}")
        click.echo("  pairwise (Bonferroni):")
        click.echo(f"  {'pair':<24}{'t':>10}{'p raw':>10}{'p adj':>10}")
        for c in result.pairwise:
            click.echo(f"  {c.label_a + ' vs ' + c.label_b:<24}"
                       f"{c.t_stat:>10.4f}{c.raw_p:>10.4f}{c.adjusted_p:>10.4f}")
    except INPUT_ERRORS as e:
        _fail_input(e)


@main.command("serve")
@click.option("--port", default=8000, type=int)
@click.option("--data", "data_dir", required=True, type=click.Path())
@click.option("--config", "config_path", default=None, type=click.Path())
def serve_cmd(port, data_dir, config_path):
    """Serve the UI endpoints and the /live trial channel."""
    import uvicorn

    from .server import create_app

    try:
        cfg, layout = _load_config(config_path)
    except INPUT_ERRORS as e:
        _fail_input(e)
    app = create_app(data_dir, cfg=cfg, layout=layout)
    uvicorn.run(app, host="127.0.0.1", port=port)


@main.command("simulate-device")
@click.option("--listen", required=True, help="host:port to accept one writer at a time")
@click.option("--dump", "dump_path", default=None, type=click.Path(),
              help="write the state dump here on each disconnect (default stdout)")
def simulate_device_cmd(listen, dump_path):
    """Protocol-compatible actuator array simulator over TCP."""
    simulator = DeviceSimulator()

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            while True:
                chunk = self.request.recv(4096)
                if not chunk:
                    break
                try:
                    simulator.feed(chunk)
                except HapticProtocolError as e:
                    click.echo(f"protocol error: {e}", err=True)
                    break
            dump = simulator.dump()
            if dump_path:
                Path(dump_path).write_text(dump)
            else:
                click.echo(dump, nl=False)

    host, port = _parse_addr(listen)
    with socketserver.TCPServer((host, port), Handler) as server:
        click.echo(f"device simulator listening on {host}:{port}", err=True)
        server.serve_forever()


def entry():
    try:
        main(standalone_mode=True)
    except SystemExit:
        raise
    except Exception as e:  # pragma: no cover - last-resort internal error path
        click.echo(f"internal error: {e}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    entry()
