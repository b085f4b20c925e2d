"""
Schema Configuration
Enumerations shared by the schemas, the pipeline and the CLI.
"""

from enum import Enum


class Domain(str, Enum):
    """Which aspect of a performance a symbol sequence encodes"""
    PITCH = "pitch"
    RHYTHM = "rhythm"
    PITCH_RHYTHM = "pitch_rhythm"


class Measure(str, Enum):
    """Per-event information measure emitted by the learner"""
    SURPRISE = "surprise"  # information content, -log2 p
    BAYESIAN_SURPRISE = "bayesian_surprise"  # KL(before || after)
    ENTROPY = "entropy"


class PitchMode(str, Enum):
    MIDI_NUMBER = "midi_number"
    PITCH_CLASS = "pitch_class"


class LearningMode(str, Enum):
    """How the learner is initialized for each piece"""
    ONLINE = "online"  # flat prior, reset between pieces
    CORPUS_PRIMED = "corpus_primed"  # prior counts from earlier-year pieces


class GroupKey(str, Enum):
    DECADE = "decade"
    STYLE = "style"
    INSTRUMENT = "instrument"
    PERFORMER = "performer"


class Stage(str, Enum):
    INGEST = "ingest"
    DYNAMICS = "dynamics"
    EMBED = "embed"
    ACOUSTICS = "acoustics"
    REPORT = "report"


# Execution order and prerequisites of each stage
STAGE_ORDER = [Stage.INGEST, Stage.DYNAMICS, Stage.EMBED, Stage.ACOUSTICS, Stage.REPORT]
STAGE_REQUIRES = {
    Stage.INGEST: set(),
    Stage.DYNAMICS: {Stage.INGEST},
    Stage.EMBED: {Stage.INGEST, Stage.DYNAMICS},
    Stage.ACOUSTICS: {Stage.INGEST},
    Stage.REPORT: {Stage.INGEST},
}


# Report tables are built from whichever of these ran
REPORT_PRODUCERS = {Stage.EMBED, Stage.ACOUSTICS}


def stage_closure(stage: Stage) -> list:
    """The stage plus everything it depends on, in execution order."""
    needed = {stage} | STAGE_REQUIRES[stage]
    if stage == Stage.REPORT:
        for producer in REPORT_PRODUCERS:
            needed |= {producer} | STAGE_REQUIRES[producer]
    return [s for s in STAGE_ORDER if s in needed]


ALL_DOMAINS = [Domain.PITCH, Domain.RHYTHM, Domain.PITCH_RHYTHM]
ALL_MEASURES = [Measure.SURPRISE, Measure.BAYESIAN_SURPRISE, Measure.ENTROPY]

# Annotation vocabularies of the jazz solo corpus the toolkit targets
CORPUS_STYLES = ["bebop", "cool", "free", "fusion", "hardbop", "postbop", "swing", "traditional"]
CORPUS_INSTRUMENTS = [
    "alto saxophone",
    "bass clarinet",
    "baritone saxophone",
    "clarinet",
    "cornet",
    "guitar",
    "piano",
    "soprano saxophone",
    "trombone",
    "trumpet",
    "tenor saxophone",
    "c melody tenor saxophone",
    "vibraphone",
]
UNKNOWN = "unknown"
