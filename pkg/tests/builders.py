"""
Synthetic inputs for tests: Standard MIDI File byte builders, pieces, a toy corpus on disk.
"""

import json
import struct
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.schema.core_schema import NoteEvent, Piece


def vlq(value: int) -> bytes:
    """MIDI variable-length quantity."""
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def track_chunk(events: Sequence[Tuple[int, bytes]], end_of_track: bool = True) -> bytes:
    """events: (absolute tick, raw event bytes), written in tick order."""
    body = b""
    last = 0
    for tick, raw in sorted(events, key=lambda e: e[0]):
        body += vlq(tick - last) + raw
        last = tick
    if end_of_track:
        body += vlq(0) + b"\xff\x2f\x00"
    return b"MTrk" + struct.pack(">L", len(body)) + body


def header_chunk(fmt: int = 0, n_tracks: int = 1, division: int = 480) -> bytes:
    return b"MThd" + struct.pack(">LHHH", 6, fmt, n_tracks, division)


def tempo_event(us_per_quarter: int) -> bytes:
    return b"\xff\x51\x03" + us_per_quarter.to_bytes(3, "big")


def note_events(notes: Sequence[Tuple[int, int, int]], channel: int = 0, velocity: int = 100) -> List[Tuple[int, bytes]]:
    """(start tick, length in ticks, pitch) → note-on / note-off events."""
    events = []
    for start, length, pitch in notes:
        events.append((start, bytes([0x90 | channel, pitch, velocity])))
        events.append((start + length, bytes([0x80 | channel, pitch, 0])))
    return events


def midi_bytes(
    notes: Sequence[Tuple[int, int, int]],
    division: int = 480,
    tempo: Optional[int] = None,
) -> bytes:
    events = note_events(notes)
    if tempo is not None:
        events = [(0, tempo_event(tempo))] + events
    return header_chunk(0, 1, division) + track_chunk(events)


def piece_from(pitches: Sequence[int], iois: Sequence[float], duration: float = 0.2, piece_id: str = "p", **meta) -> Piece:
    """Monophonic piece; len(iois) == len(pitches) - 1."""
    onsets = np.concatenate([[0.0], np.cumsum(iois)]) if len(pitches) > 1 else np.zeros(1)
    events = [NoteEvent(onset=float(t), duration=duration, pitch=p) for t, p in zip(onsets, pitches)]
    return Piece(id=piece_id, events=events, **meta)


def markov_pitches(rng: np.random.Generator, transitions: np.ndarray, states: Sequence[int], length: int) -> List[int]:
    current = 0
    out = []
    for _ in range(length):
        out.append(states[current])
        current = int(rng.choice(len(states), p=transitions[current]))
    return out


def write_toy_corpus(root: Path, n_pieces: int = 3, seconds: float = 12.0) -> Path:
    """
    MIDI pieces long enough for every analysis stage, plus manifest and run config.
    Returns the config path.
    """
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(7)
    rows = ["id,path,performer,year,style,instrument"]
    styles = ["bebop", "cool", "swing"]
    for i in range(n_pieces):
        ticks_per_note = 240  # 0.25 s at the default tempo
        n_notes = int(seconds / 0.25)
        pitches = rng.choice([60, 62, 64, 65, 67, 69], size=n_notes)
        notes = [(k * ticks_per_note, ticks_per_note - 20, int(p)) for k, p in enumerate(pitches)]
        name = f"piece{i}.mid"
        (root / name).write_bytes(midi_bytes(notes))
        rows.append(f"piece{i},{name},Player {i},{1950 + 4 * i},{styles[i % 3]},ts")
    (root / "manifest.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    config = {"manifest": "manifest.csv", "output_dir": str(root / "out")}
    (root / "run.json").write_text(json.dumps(config), encoding="utf-8")
    return root / "run.json"


