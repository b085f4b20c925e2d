"""
Run configuration: one JSON document with nested sections.

    {
      "manifest": "corpus/manifest.csv",
      "stages": ["ingest", "dynamics", "embed", "acoustics", "report"],
      "hbsl": {"alpha": 1.0, "c": 5.0, "max_levels": 3, "order": 1, "learning_mode": "online"},
      "rhythm": {"bins_per_octave": 4, "clamp": 8},
      "tsne": {"perplexity": 2.0, "seed": 40, ...},
      "acoustics": {"sample_rate": 16000, "cutoff": 40.0, "prominence": 0.05, ...},
      "output_dir": "outputs",
      "jobs": 1
    }

Only "manifest" is required. Relative manifest paths resolve against the config file.
"""

import hashlib
import json
import os
from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..corpus.csv_reader import CsvSchema
from ..errors import BadValue, ConfigError, MissingRequired, UnknownKey
from .core_schema import AcousticsConfig, HbslConfig, RhythmConfig, TsneConfig
from .schema_config import STAGE_ORDER, STAGE_REQUIRES, GroupKey, PitchMode, Stage

OUTPUT_DIR_ENV = "MUSIC_DYNAMICS_OUTPUT_DIR"

# Settings that never change a numeric output; left out of the config hash
NON_COMPUTATIONAL_KEYS = {"output_dir", "jobs"}


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    manifest: Path = Field(..., description="Corpus manifest CSV")
    stages: List[Stage] = Field(default_factory=lambda: list(STAGE_ORDER))
    pitch_mode: PitchMode = PitchMode.MIDI_NUMBER
    hbsl: HbslConfig = Field(default_factory=HbslConfig)
    rhythm: RhythmConfig = Field(default_factory=RhythmConfig)
    tsne: TsneConfig = Field(default_factory=TsneConfig)
    acoustics: AcousticsConfig = Field(default_factory=AcousticsConfig)
    csv_schema: CsvSchema = Field(default_factory=CsvSchema)
    zscore_rows: bool = Field(False, description="Standardize each feature row before embedding")
    group_keys: List[GroupKey] = Field(default_factory=lambda: list(GroupKey))
    output_dir: Path = Path("outputs")
    jobs: int = Field(1, ge=1, description="Worker processes for per-piece work")

    @field_validator("manifest")
    @classmethod
    def _manifest_exists(cls, path: Path) -> Path:
        if not path.is_file():
            raise ValueError(f"manifest {path} does not exist")
        return path

    @model_validator(mode="after")
    def _check_stages(self) -> "RunConfig":
        chosen = set(self.stages)
        for stage in chosen:
            missing = STAGE_REQUIRES[stage] - chosen
            if missing:
                names = ", ".join(sorted(s.value for s in missing))
                raise ValueError(f"stage {stage.value!r} requires {names}")
        self.stages = [s for s in STAGE_ORDER if s in chosen]
        return self

    def config_hash(self) -> str:
        """sha256 of the canonical JSON of every setting that affects computation."""
        canonical = self.model_dump(mode="json", exclude=NON_COMPUTATIONAL_KEYS)
        canonical["manifest"] = str(Path(self.manifest).resolve())
        return hashlib.sha256(json.dumps(canonical, sort_keys=True).encode("utf-8")).hexdigest()


def _to_config_error(error: ValidationError) -> ConfigError:
    first = error.errors()[0]
    key = ".".join(str(part) for part in first["loc"]) or "<root>"
    kind = first["type"]
    if kind == "extra_forbidden":
        return UnknownKey(key, "unknown key")
    if kind == "missing":
        return MissingRequired(key, "required key missing")
    return BadValue(key, first["msg"])


def validate_config(source: Union[str, Path, dict], base_dir: Optional[Path] = None) -> RunConfig:
    """
    Load and validate a run configuration from a JSON file (or an already-parsed dict).

    Raises:
        UnknownKey / MissingRequired / BadValue, each naming the offending dotted key
    """
    if isinstance(source, dict):
        data = dict(source)
        base = Path(base_dir) if base_dir else Path.cwd()
    else:
        path = Path(source)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise BadValue(str(path), f"cannot read config: {e}") from e
        except json.JSONDecodeError as e:
            raise BadValue(str(path), f"not valid JSON: {e}") from e
        base = Path(base_dir) if base_dir else path.parent
    if not isinstance(data, dict):
        raise BadValue("<root>", "config must be a JSON object")

    manifest = data.get("manifest")
    if isinstance(manifest, str) and not Path(manifest).is_absolute():
        data["manifest"] = str(base / manifest)

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise _to_config_error(e) from None


def apply_overrides(
    config: RunConfig,
    output_dir: Optional[Path] = None,
    jobs: Optional[int] = None,
    stages: Optional[List[Stage]] = None,
) -> RunConfig:
    """
    CLI flags and the environment on top of the file. Precedence for the output directory:
    --out, then $MUSIC_DYNAMICS_OUTPUT_DIR, then the config file.
    """
    update = {}
    env_dir = os.getenv(OUTPUT_DIR_ENV)
    if output_dir is not None:
        update["output_dir"] = Path(output_dir)
    elif env_dir:
        update["output_dir"] = Path(env_dir)
    if jobs is not None:
        if jobs < 1:
            raise BadValue("jobs", "must be >= 1")
        update["jobs"] = jobs
    if stages is not None:
        update["stages"] = [s for s in STAGE_ORDER if s in set(stages)]
    return config.model_copy(update=update)
