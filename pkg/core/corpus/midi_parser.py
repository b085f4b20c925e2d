"""
Standard MIDI File reader.

Reads format 0/1 files with metrical (PPQ) time division and returns the note events in
seconds. Tempo changes from every track form one global tempo map. Metadata is never read
from meta-events; it comes from the corpus manifest.
"""

import logging
import struct
from bisect import bisect_right
from collections import defaultdict, deque
from typing import Deque, Dict, List, Tuple

from ..errors import (
    CorpusError,
    MalformedHeader,
    MalformedTrack,
    TruncatedTrack,
    UnsupportedFormat,
    UnsupportedTimeDivision,
)
from ..schema.core_schema import NoteEvent, Piece

logger = logging.getLogger(__name__)

DEFAULT_TEMPO = 500_000  # µs per quarter note (120 BPM)

META = 0xFF
SYSEX = 0xF0
SYSEX_ESCAPE = 0xF7
META_TEMPO = 0x51
META_END_OF_TRACK = 0x2F
NOTE_OFF = 0x80
NOTE_ON = 0x90

# number of data bytes following each channel-voice status
_DATA_LENGTH = {0x80: 2, 0x90: 2, 0xA0: 2, 0xB0: 2, 0xC0: 1, 0xD0: 1, 0xE0: 2}


class _ByteReader:
    """Cursor over a track's bytes; running out of bytes means the track is truncated."""

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def at_end(self) -> bool:
        return self.pos >= len(self.data)

    def byte(self) -> int:
        if self.pos >= len(self.data):
            raise TruncatedTrack("track data ends mid-event")
        value = self.data[self.pos]
        self.pos += 1
        return value

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedTrack("track data ends mid-event")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def variable_length(self) -> int:
        value = 0
        for _ in range(4):
            b = self.byte()
            value = (value << 7) | (b & 0x7F)
            if not b & 0x80:
                return value
        raise MalformedTrack("variable-length quantity longer than 4 bytes")


class _Track:
    def __init__(self) -> None:
        self.tempi: List[Tuple[int, int]] = []
        # (on_tick, off_tick, pitch, velocity)
        self.notes: List[Tuple[int, int, int, int]] = []
        self.end_tick = 0


def _read_header(data: bytes) -> Tuple[int, int, int, int]:
    """Returns (format, n_tracks, ppq, offset of first chunk)."""
    if len(data) < 14 or data[:4] != b"MThd":
        raise MalformedHeader("missing MThd header chunk")
    (length,) = struct.unpack(">L", data[4:8])
    if length < 6 or 8 + length > len(data):
        raise MalformedHeader(f"bad header length {length}")
    fmt, n_tracks, division = struct.unpack(">HHH", data[8:14])
    if division & 0x8000:
        raise UnsupportedTimeDivision("SMPTE time division is not supported")
    if fmt == 2:
        raise UnsupportedFormat("SMF format 2 is not supported")
    if fmt > 2:
        raise MalformedHeader(f"unknown SMF format {fmt}")
    if division == 0:
        raise MalformedHeader("zero ticks per quarter note")
    return fmt, n_tracks, division, 8 + length


def _read_track(chunk: bytes) -> _Track:
    track = _Track()
    reader = _ByteReader(chunk)
    sounding: Dict[Tuple[int, int], Deque[Tuple[int, int]]] = defaultdict(deque)
    tick = 0
    status = None

    while not reader.at_end():
        tick += reader.variable_length()
        first = reader.byte()

        if first == META:
            meta_type = reader.byte()
            payload = reader.take(reader.variable_length())
            if meta_type == META_TEMPO and len(payload) == 3:
                track.tempi.append((tick, int.from_bytes(payload, "big")))
            elif meta_type == META_END_OF_TRACK:
                break
            continue
        if first in (SYSEX, SYSEX_ESCAPE):
            reader.take(reader.variable_length())
            status = None
            continue

        if first & 0x80:
            if first > 0xEF:
                raise MalformedTrack(f"unexpected system status byte 0x{first:02X}")
            status = first
            data = [reader.byte() for _ in range(_DATA_LENGTH[status & 0xF0])]
        else:
            # running status: `first` is already the first data byte
            if status is None:
                raise MalformedTrack("data byte without a running status")
            data = [first] + [reader.byte() for _ in range(_DATA_LENGTH[status & 0xF0] - 1)]
        if any(b & 0x80 for b in data):
            raise MalformedTrack("status byte where a data byte was expected")

        kind, channel = status & 0xF0, status & 0x0F
        if kind == NOTE_ON and data[1] > 0:
            sounding[(channel, data[0])].append((tick, data[1]))
        elif kind == NOTE_OFF or kind == NOTE_ON:
            pending = sounding.get((channel, data[0]))
            if not pending:
                logger.debug("note-off without note-on (pitch %d) at tick %d", data[0], tick)
                continue
            on_tick, velocity = pending.popleft()
            track.notes.append((on_tick, tick, data[0], velocity))

    track.end_tick = tick
    for (_, pitch), pending in sounding.items():
        for on_tick, velocity in pending:
            track.notes.append((on_tick, tick, pitch, velocity))
    return track


class _TempoMap:
    """Tick → seconds conversion over a piecewise-constant tempo."""

    def __init__(self, tempi: List[Tuple[int, int]], ppq: int) -> None:
        self.ppq = ppq
        changes = sorted(tempi, key=lambda t: t[0])
        if not changes or changes[0][0] > 0:
            changes.insert(0, (0, DEFAULT_TEMPO))
        self.ticks: List[int] = []
        self.tempo: List[int] = []
        self.seconds: List[float] = []
        elapsed = 0.0
        for tick, tempo in changes:
            if self.ticks:
                elapsed += (tick - self.ticks[-1]) * self.tempo[-1] / (1e6 * ppq)
                if tick == self.ticks[-1]:
                    # later change at the same tick wins
                    self.ticks.pop()
                    self.tempo.pop()
                    self.seconds.pop()
            self.ticks.append(tick)
            self.tempo.append(tempo)
            self.seconds.append(elapsed)

    def to_seconds(self, tick: int) -> float:
        i = bisect_right(self.ticks, tick) - 1
        return self.seconds[i] + (tick - self.ticks[i]) * self.tempo[i] / (1e6 * self.ppq)


def parse_midi(data: bytes, piece_id: str = "") -> Piece:
    """
    Parse a Standard MIDI File into a Piece holding only note events.

    Raises:
        MalformedHeader, UnsupportedTimeDivision, UnsupportedFormat,
        TruncatedTrack, MalformedTrack
    """
    try:
        _, n_tracks, ppq, offset = _read_header(bytes(data))
        tracks: List[_Track] = []
        while offset + 8 <= len(data):
            chunk_type = data[offset:offset + 4]
            (length,) = struct.unpack(">L", data[offset + 4:offset + 8])
            start = offset + 8
            if start + length > len(data):
                raise TruncatedTrack(
                    f"chunk {chunk_type!r} declares {length} bytes, {len(data) - start} remain"
                )
            if chunk_type == b"MTrk":
                tracks.append(_read_track(data[start:start + length]))
            offset = start + length
        if offset != len(data):
            raise TruncatedTrack("trailing bytes shorter than a chunk header")
    except CorpusError:
        raise
    except (struct.error, IndexError, KeyError, ValueError) as e:
        raise MalformedTrack(f"unreadable MIDI data: {e}") from e

    if len(tracks) != n_tracks:
        logger.warning("%s: header announces %d tracks, found %d", piece_id, n_tracks, len(tracks))

    tempo_map = _TempoMap([t for track in tracks for t in track.tempi], ppq)
    events: List[NoteEvent] = []
    for track in tracks:
        for on_tick, off_tick, pitch, velocity in track.notes:
            onset = tempo_map.to_seconds(on_tick)
            duration = tempo_map.to_seconds(off_tick) - onset
            if duration <= 0:
                continue
            events.append(NoteEvent(onset=onset, duration=duration, pitch=pitch, velocity=velocity))
    return Piece(id=piece_id, events=events)
