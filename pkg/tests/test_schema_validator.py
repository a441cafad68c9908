"""Tests for the JSON schema validator."""

import json

import pytest

from pathlib import Path
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from lib.bundle_transport import connection_from_gens
from lib.classify_certify import GenConfig, check_ABC_config, classify
from lib.linalg_groups import b_theta, c_theta, gens_to_json, su2_lift, v_phi_gamma
from lib.orbit_explorer import group_ball, orbit
from lib.schema_validator import SCHEMAS, load_schema, schema_errors, validate_document, validate_file


class TestLoadSchema:
    """Shipped schemas."""

    def test_every_schema_loads(self):
        for name in SCHEMAS:
            assert load_schema(name)['$schema'].startswith('http://json-schema.org/draft-07')

    def test_unknown_schema(self):
        with pytest.raises(ValueError, match='unknown schema'):
            load_schema('sites')


class TestLibraryOutputConforms:
    """Documents produced by the library pass their schemas."""

    def test_classification(self):
        result = classify(GenConfig('pi', 'pi*2/3', 'pi/2'), max_size=200, max_depth=20)
        assert validate_document('classification', result.to_json())[0]

    def test_certificates(self):
        certificates = check_ABC_config(GenConfig('pi/2', 'pi/4', 'pi/2'))
        assert validate_document('certificates', [c.to_json() for c in certificates])[0]

    def test_orbit_report(self):
        gens = [c_theta(1.0), v_phi_gamma(0.7, 0.0) @ c_theta(0.5)]
        report = orbit(gens, [0.0, 0.0, 1.0], max_depth=3, max_size=500, snapshots=True, probes=64)
        assert schema_errors('orbit_report', report.to_json()) == []

    def test_ball_with_covering_radius(self):
        ball = group_ball([c_theta(1.0)], max_depth=2, max_size=50)
        payload = dict(ball.to_json(), covering_radius=0.5)
        assert schema_errors('ball', payload) == []

    def test_generators_and_connection(self):
        gens = [b_theta(0.5), su2_lift(v_phi_gamma(1.0, 0.3))]
        assert schema_errors('generators', gens_to_json(gens)) == []
        conn = connection_from_gens(*gens)
        assert schema_errors('connection', conn.to_json()) == []


class TestViolations:
    """Error reporting."""

    def test_missing_required_field(self):
        valid, message = validate_document('classification',
                                           {'kind': 'cyclic', 'order': 3, 'saturated': True})
        assert not valid
        assert "'ball_size' is a required property" in message

    def test_error_paths(self):
        errors = schema_errors('generators', {'kind': 'so3', 'matrices': [[[1, 0], [0, 'a']]]})
        assert errors and errors[0].startswith('matrices/0/1/1')

    def test_root_errors_are_labelled(self):
        assert schema_errors('certificates', {})[0].startswith('<root>')

    def test_unknown_kind(self):
        errors = schema_errors('ball', {'group_kind': 'sl2', 'size': 1, 'depth': 0,
                                        'saturated': True, 'likely_infinite': False,
                                        'growth': [1], 'covering_radius': 0.0})
        assert len(errors) == 1
        assert errors[0].startswith('group_kind')


class TestValidateFile:
    """Files on disk."""

    def test_valid_file(self, tmp_path):
        path = tmp_path / 'gens.json'
        path.write_text(json.dumps(gens_to_json([c_theta(0.3)])))
        assert validate_file('generators', path) == (True, 'generators document is valid')

    def test_missing_file(self, tmp_path):
        valid, message = validate_file('generators', tmp_path / 'absent.json')
        assert not valid
        assert message.startswith('File not found')

    def test_invalid_json(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"kind": ')
        valid, message = validate_file('generators', path)
        assert not valid
        assert message.startswith('Invalid JSON')


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
