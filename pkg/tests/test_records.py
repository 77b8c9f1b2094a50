import io

import pytest

from drlift.records import ExperimentRecord, read_records, render_records


def sample_records():
    return [
        ExperimentRecord(
            instance="inst-a",
            mode="exact-log",
            solver="double-greedy",
            value=1.2345678901234567,
            opt=2.0,
            ratio=None,
            oracle_calls=42,
            wall_ms=12.5,
            seed=7,
        ),
        ExperimentRecord(
            instance="scaling-B16",
            mode="naive-copies",
            solver="double-greedy-det",
            value=4.0,
            opt=None,
            ratio=None,
            oracle_calls=34,
            wall_ms=0.1,
            seed=None,
        ),
    ]


class TestRecord:
    def test_ratio_filled_from_opt(self):
        rec = sample_records()[0]
        assert rec.ratio == pytest.approx(1.2345678901234567 / 2.0)

    def test_ratio_left_unset_without_opt(self):
        assert sample_records()[1].ratio is None


@pytest.mark.parametrize("fmt", ["csv", "jsonl"])
class TestRoundTrip:
    def test_lossless(self, fmt):
        records = sample_records()
        text = render_records(records, fmt)
        back = read_records(io.StringIO(text), fmt)
        assert back == records

    def test_float_precision_preserved(self, fmt):
        rec = sample_records()[0]
        back = read_records(io.StringIO(render_records([rec], fmt)), fmt)[0]
        assert back.value == rec.value  # bit-exact

    def test_header_or_shape(self, fmt):
        text = render_records(sample_records(), fmt)
        first = text.splitlines()[0]
        if fmt == "csv":
            assert first == "instance,mode,solver,value,opt,ratio,oracle_calls,wall_ms,seed"
        else:
            assert first.startswith('{"instance":')


class TestErrors:
    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render_records([], "xml")

    def test_header_mismatch(self):
        with pytest.raises(ValueError):
            read_records(io.StringIO("a,b,c\n1,2,3\n"), "csv")
