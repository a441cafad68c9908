"""Tests for deterministic JSON and CSV output."""

import json

import numpy as np
import pytest

from pathlib import Path
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from lib.output_writer import dumps_json, emit, format_csv, point_header, write_atomic, write_csv


class TestJson:
    """JSON rendering."""

    def test_sorted_keys_and_newline(self):
        text = dumps_json({'b': 1, 'a': [1, 2]})
        assert text.index('"a"') < text.index('"b"')
        assert text.endswith('\n')
        assert json.loads(text) == {'a': [1, 2], 'b': 1}

    def test_numpy_values(self):
        payload = {'n': np.int64(3), 'x': np.float64(0.5), 'ok': np.bool_(True),
                   'v': np.array([1.0, 2.0])}
        assert json.loads(dumps_json(payload)) == {'n': 3, 'x': 0.5, 'ok': True, 'v': [1.0, 2.0]}

    def test_unserializable_value(self):
        with pytest.raises(TypeError):
            dumps_json({'x': object()})

    def test_identical_payloads_render_identically(self):
        assert dumps_json({'y': 1.0, 'x': 2}) == dumps_json({'x': 2, 'y': 1.0})


class TestCsv:
    """CSV rendering of orbit points."""

    def test_header_and_precision(self):
        text = format_csv(np.array([[0.1, 1.0, -2.5]]), ('x', 'y', 'z'))
        lines = text.splitlines()
        assert lines[0] == 'x,y,z'
        assert lines[1] == '0.10000000000000001,1,-2.5'

    def test_values_round_trip_exactly(self):
        rng = np.random.default_rng(0)
        rows = rng.normal(size=(5, 3))
        body = format_csv(rows, ('x', 'y', 'z')).splitlines()[1:]
        parsed = np.array([[float(v) for v in line.split(',')] for line in body])
        assert np.array_equal(parsed, rows)

    def test_column_mismatch(self):
        with pytest.raises(ValueError, match='columns'):
            format_csv(np.zeros((2, 4)), ('x', 'y', 'z'))

    def test_point_headers(self):
        assert point_header(3) == ('x', 'y', 'z')
        assert point_header(4) == ('x0', 'x1', 'x2', 'x3')
        assert point_header(6)[3] == 'x_minus'


class TestAtomicWrites:
    """Files appear whole or not at all."""

    def test_write_leaves_no_temporary_file(self, tmp_path):
        target = tmp_path / 'out' / 'report.json'
        write_atomic(target, dumps_json({'size': 4}))

        assert json.loads(target.read_text()) == {'size': 4}
        assert [p.name for p in target.parent.iterdir()] == ['report.json']

    def test_overwrite(self, tmp_path):
        target = tmp_path / 'points.csv'
        write_atomic(target, 'old\n')
        write_csv(target, np.array([[1.0, 0.0, 0.0]]))
        assert target.read_text() == 'x,y,z\n1,0,0\n'

    def test_failed_write_is_cleaned_up(self, tmp_path, monkeypatch):
        def refuse(src, dst):
            raise OSError('disk full')

        monkeypatch.setattr('lib.output_writer.os.replace', refuse)
        with pytest.raises(IOError, match='disk full'):
            write_atomic(tmp_path / 'report.json', '{}\n')
        assert list(tmp_path.iterdir()) == []


class TestEmit:
    """Stdout or file output."""

    def test_stdout(self, capsys):
        emit('{}\n', None)
        assert capsys.readouterr().out == '{}\n'

    def test_file(self, tmp_path, capsys):
        target = tmp_path / 'result.json'
        emit('{}\n', target)
        assert target.read_text() == '{}\n'
        assert capsys.readouterr().out == ''


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
