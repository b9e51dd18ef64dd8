import json
from fractions import Fraction

import pandas as pd
import pytest

from src.exceptions import InputError
from src.geometry import EMPTY, Piece
from src.ingest import AllocationReader, InstanceReader, TranscriptReader, parse_transcript
from src.protocol import Allocation, Transcript, run
from src.storage import ParquetWriter, TextWriter, decode_data, encode_data, events_frame, format_transcript
from src.valuation import StepDensity

F = Fraction


def P(*pairs):
    return Piece.from_pairs(pairs)


class TestCodec:
    def test_encodes_fractions_and_pieces(self):
        data = {"value": F(1, 3), "leftover": P((0, F(1, 2))), "pieces": [EMPTY, P((F(1, 2), 1))], "r": 25}
        encoded = encode_data(data)
        assert encoded == {
            "value": "1/3",
            "leftover": [["0/1", "1/2"]],
            "pieces": [[], [["1/2", "1/1"]]],
            "r": 25,
        }
        assert decode_data(json.loads(json.dumps(encoded))) == data

    def test_unknown_field(self):
        with pytest.raises(InputError):
            encode_data({"mystery": 1})

    def test_malformed_value(self):
        with pytest.raises(InputError):
            decode_data({"value": "one third"})


class TestInstanceFiles:
    def test_write_then_read(self, tmp_path):
        densities = [
            StepDensity.normalized([0, F(1, 4), 1], [3, 1]),
            StepDensity.uniform(),
            StepDensity.normalized([0, F(5, 8), 1], [1, 7]),
            StepDensity.uniform(),
        ]
        path = TextWriter(tmp_path).write_instance(densities, "i.txt", label="demo")
        instance = InstanceReader(path).read()
        assert instance.n == 4 and instance.label == "demo"
        assert list(instance.densities) == densities

    def test_raw_values_are_normalized(self, tmp_path):
        path = tmp_path / "raw.txt"
        lines = ["label: raw", "n: 4"] + [f"player {i}: 0/1 2; 1/2 6" for i in range(1, 5)]
        path.write_text("\n".join(lines) + "\n")
        d = InstanceReader(path).read().densities[0]
        assert d.values == (F(1, 2), F(3, 2))

    @pytest.mark.parametrize(
        "text",
        [
            "label: x\nplayer 1: 0/1 1\n",
            "n: 4\nplayer 1: 0/1 1\nplayer 2: 0/1 1\nplayer 3: 0/1 1\nplayer 3: 0/1 1\n",
            "n: four\n",
            "n: 3\nplayer 1: 0/1 1\nplayer 2: 0/1 1\nplayer 3: 0/1 1\n",
            "n: 4\nplayer 1: 0/1\nplayer 2: 0/1 1\nplayer 3: 0/1 1\nplayer 4: 0/1 1\n",
            "n: 4\ncolour: red\n",
        ],
    )
    def test_malformed(self, tmp_path, text):
        path = tmp_path / "bad.txt"
        path.write_text(text)
        with pytest.raises(InputError):
            InstanceReader(path).read()

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            InstanceReader(tmp_path / "absent.txt").read()


class TestAllocationFiles:
    def test_write_then_read(self, tmp_path, uniform4):
        allocation = Allocation({1: P((0, F(1, 4)), (F(1, 2), F(5, 8))), 2: P((F(1, 4), F(1, 2))),
                                 3: P((F(5, 8), 1)), 4: EMPTY}, EMPTY)
        path = TextWriter(tmp_path).write_allocation(allocation, uniform4, "a.txt")
        assert "value 1: 3/8 1/4 3/8 0/1" in path.read_text()
        assert AllocationReader(path).read() == allocation

    def test_bad_piece(self, tmp_path):
        path = tmp_path / "a.txt"
        path.write_text('share 1: [["1/2", "1/4"]]\n')
        with pytest.raises(InputError):
            AllocationReader(path).read()


class TestTranscriptFiles:
    def test_run_transcript_survives_the_file(self, tmp_path, generic4_run):
        _, transcript = generic4_run
        path = TextWriter(tmp_path).write_transcript(transcript, "t.log")
        assert TranscriptReader(path).read().events == transcript.events

    def test_objection_run_survives_the_text(self, opposed4):
        _, transcript = run(opposed4)
        epsilon = transcript.of_kind("epsilon")
        assert epsilon, "opposed players must object at least once"
        parsed = parse_transcript(format_transcript(transcript).splitlines())
        assert parsed.events == transcript.events
        assert isinstance(parsed.of_kind("epsilon")[0].data["own_piece"], Piece)

    def test_field_types_are_unique(self):
        with pytest.raises(InputError):
            encode_data({"own": P((0, 1))})

    def test_out_of_order(self):
        line = json.dumps({"seq": 1, "step": "1", "kind": "cut", "actor": 2, "data": {}})
        with pytest.raises(InputError):
            parse_transcript([line])

    def test_not_json(self):
        with pytest.raises(InputError):
            parse_transcript(["{seq: 0"])

    def test_missing_keys(self):
        with pytest.raises(InputError):
            parse_transcript([json.dumps({"seq": 0, "kind": "cut"})])


class TestParquet:
    def test_events_frame(self, uniform4):
        _, transcript = run(uniform4)
        df = events_frame(transcript)
        assert list(df.columns) == ["seq", "step", "kind", "actor", "payload"]
        assert list(df["kind"]) == ["cut", "poll", "distribute", "allocate"]
        assert df["actor"].isna().tolist() == [False, False, True, True]

    def test_write_and_read(self, tmp_path, uniform4):
        _, transcript = run(uniform4)
        writer = ParquetWriter(tmp_path)
        writer.write_events(transcript, "events.parquet")
        df = pd.read_parquet(tmp_path / "events.parquet")
        assert len(df) == len(transcript)
        lines = format_transcript(transcript).splitlines()
        assert json.loads(df["payload"].iloc[0]) == json.loads(lines[0])["data"]

    def test_empty_transcript_is_skipped(self, tmp_path):
        assert ParquetWriter(tmp_path).write_events(Transcript(), "none.parquet") is None
