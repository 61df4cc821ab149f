import numpy as np
import pytest

from tempered_plaplacian.core_types import GridField, RadialField
from tempered_plaplacian.exceptions import SnapshotParseError
from tempered_plaplacian.snapshot import (
    load_snapshot, read_snapshot, save_residuals, save_snapshot
)
from tempered_plaplacian.solver import run


def test_grid_snapshot_round_trip(tmp_path, params, rng):
    field = GridField.from_function(2, 0.125, lambda x: rng.random(x.shape[:-1]))
    path = save_snapshot(field, 0.7, tmp_path / 'grid.csv', params)
    snapshot = read_snapshot(path, n=2)
    assert np.array_equal(snapshot.field.values, field.values)
    assert snapshot.t == 0.7
    assert snapshot.header['kind'] == 'grid'
    assert float(snapshot.header['lambda']) == params.lam
    assert path.read_text().startswith('# n=2\n')


def test_radial_snapshot_round_trip(tmp_path):
    field = RadialField.uniform(3, 8, lambda r: np.cos(r) * (1 - r))
    path = save_snapshot(field, 1.5, tmp_path / 'radial.csv')
    restored = load_snapshot(path)
    assert isinstance(restored, RadialField)
    assert restored.n == 3
    assert np.array_equal(restored.values, field.values)
    assert np.array_equal(restored.radii, field.radii)


def test_dimension_mismatch_is_rejected(tmp_path):
    path = save_snapshot(GridField.zeros(2, 0.25), 0.0, tmp_path / 'grid.csv')
    with pytest.raises(SnapshotParseError, match='n=2'):
        load_snapshot(path, n=3)


def test_malformed_value_reports_line(tmp_path):
    path = tmp_path / 'bad.csv'
    path.write_text('# n=2\n# h=0.5\n# t=0\n0,0,1\n0,0.5,abc\n')
    with pytest.raises(SnapshotParseError) as error:
        load_snapshot(path)
    assert error.value.line == 5
    assert 'line 5' in str(error.value)


@pytest.mark.parametrize('text', [
    '# n=2\n# t=0\n0,0,1\n',
    '# n=2\n# h=0.5\n# t=0\n0,0,1\n# h=0.25\n',
    '# n=2\n# h=0.5\n# t=0\n0,0\n',
    '# n=2\n# h=0.5\n# t=0\n5,0,1\n',
    '# n=2\n# h=0.5\n# t=0\n1,0,1\n',
    '# colour=red\n',
])
def test_malformed_snapshots(tmp_path, text):
    path = tmp_path / 'bad.csv'
    path.write_text(text)
    with pytest.raises(SnapshotParseError):
        load_snapshot(path)


def test_residual_file(tmp_path, logistic_config):
    trajectory, _ = run(logistic_config)
    path = save_residuals(trajectory, tmp_path / 'residuals.csv')
    lines = path.read_text().splitlines()
    assert lines[0] == 't,residual'
    assert len(lines) == trajectory.steps + 1
