import numpy as np
import pandas as pd
import pytest

from builders import piece_from
from core.errors import BadValue
from core.pipeline.reports import (
    AcousticSummary,
    OutputWriter,
    RunOutputs,
    band_power_table,
    group_report,
    write_group_report,
)
from core.schema.core_schema import Spectrum

FREQS = np.array([0.5, 1.0, 2.0, 4.0])


def _summary(piece_id, scale=1.0):
    return AcousticSummary(
        piece_id=piece_id,
        band_means=scale * np.array([4.0, 3.0, 2.0, 1.0]),
        carrier=Spectrum(frequencies=np.array([0.0, 100.0, 200.0]), power=scale * np.array([0.1, 1.0, 0.2])),
        cycle_lengths=np.array([0.5, 0.5, 0.5]),
        rates=np.array([0.5, 0.5]),
    )


def _outputs(meta):
    outputs = RunOutputs(band_frequencies=FREQS)
    for i, (piece_id, fields) in enumerate(meta.items()):
        outputs.pieces[piece_id] = piece_from([60, 62], [0.5], piece_id=piece_id, **fields)
        outputs.acoustics[piece_id] = _summary(piece_id, scale=1.0 + i)
    outputs.embeddings["surprise"] = pd.DataFrame(
        {"piece_id": sorted(meta), "domain": "pitch", "x": 0.0, "y": 0.0}
    )
    return outputs


def test_years_in_one_decade_form_one_group():
    outputs = _outputs({"a": {"year": 1954}, "b": {"year": 1957}})
    tables = group_report(outputs, "decade")
    assert set(tables["spectra"]["group"]) == {"1950"}
    assert len(tables["spectra"]) == len(FREQS)
    # unweighted mean of scale 1 and scale 2 pieces
    assert tables["spectra"]["mean_power"].tolist() == [6.0, 4.5, 3.0, 1.5]
    assert tables["embedding_surprise"]["group"].tolist() == ["1950", "1950"]


def test_two_styles_two_groups_per_table():
    outputs = _outputs({"a": {"style": "cool"}, "b": {"style": "bebop"}, "c": {"style": "cool"}})
    tables = group_report(outputs, "style")
    assert sorted(tables) == ["carrier", "embedding_surprise", "rates", "spectra"]
    for name in ("spectra", "carrier", "rates"):
        assert sorted(set(tables[name]["group"])) == ["bebop", "cool"]
    assert len(tables["spectra"]) == 2 * len(FREQS)
    rates = tables["rates"]
    cool = rates[rates["group"] == "cool"]
    assert cool["probability"].sum() == pytest.approx(1.0)


def test_unknown_group_key():
    with pytest.raises(BadValue):
        group_report(_outputs({"a": {}}), "album")


def test_group_report_files(tmp_path):
    writer = OutputWriter(tmp_path)
    tables = group_report(_outputs({"a": {"instrument": "ts"}}), "instrument")
    written = write_group_report(writer, tables, "instrument")
    assert "reports/group_instrument_spectra.csv" in written
    assert (tmp_path / "reports" / "group_instrument_rates.csv").is_file()


def test_csv_output_is_stable(tmp_path):
    outputs = _outputs({"b": {}, "a": {}})
    writer = OutputWriter(tmp_path)
    path = writer.write_csv("acoustics/band_power.csv", band_power_table(outputs))
    first = path.read_bytes()
    writer.write_csv("acoustics/band_power.csv", band_power_table(outputs))
    assert path.read_bytes() == first
    assert first.splitlines()[1].startswith(b"a,")
    assert b"\r\n" not in first
    assert writer.sorted_inventory() == ["acoustics/band_power.csv"]


def test_json_output_sorted_keys(tmp_path):
    writer = OutputWriter(tmp_path)
    path = writer.write_json("x.json", {"b": 1, "a": 2})
    assert path.read_text(encoding="utf-8").index('"a"') < path.read_text(encoding="utf-8").index('"b"')
