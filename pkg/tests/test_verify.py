import json

import jsonschema
import pytest

from kprabhakar import Grid1D
from kprabhakar.verify import (
    IDENTITY_IDS,
    IdentityCase,
    default_cases,
    report_to_dict,
    reports_to_json,
    run_identity,
    run_suite,
)

REPORT_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "properties": {
            "identity_id": {"type": "string", "enum": list(IDENTITY_IDS)},
            "test_function_id": {"type": "string"},
            "params": {"type": "string"},
            "grid_size": {"type": "integer", "minimum": 2},
            "max_abs_err": {"type": ["number", "null"]},
            "max_rel_err": {"type": ["number", "null"]},
            "passed": {"type": "boolean"},
            "threshold": {"type": "number"},
            "path_a": {"type": "string"},
            "path_b": {"type": "string"},
            "diagnostic": {"type": ["string", "null"]},
        },
        "required": [
            "identity_id",
            "grid_size",
            "max_abs_err",
            "max_rel_err",
            "passed",
            "threshold",
            "path_a",
            "path_b",
        ],
        "additionalProperties": False,
    },
}


def test_seventeen_identity_families():
    assert len(IDENTITY_IDS) == 17
    assert len(default_cases()) == 17


def test_unknown_identity_rejected():
    with pytest.raises(ValueError):
        IdentityCase(identity_id="NotAnIdentity")


def test_empty_suite():
    assert run_suite([]) == []


def test_single_identity_runs_and_names_paths():
    report = run_identity(IdentityCase(identity_id="Duality_Sumudu_Laplace"))
    assert report.passed
    assert report.path_a and report.path_b
    assert report.path_a != report.path_b


def test_every_identity_compares_distinct_paths():
    grid = Grid1D.from_span(0.0, 2.0, 513)
    for case in default_cases():
        report = run_identity(case, grid)
        assert report.path_a != report.path_b, case.identity_id


def test_forced_bad_case_becomes_failed_report():
    # omega far outside the Sumudu geometric-series bound at u = 2
    case = IdentityCase(identity_id="SumuduLemma_3_5", params={"omega": -50.0})
    report = run_identity(case, Grid1D.from_span(0.0, 2.0, 257))
    assert not report.passed
    assert report.diagnostic


def test_suite_sorted_and_deterministic():
    cases = [
        IdentityCase(identity_id="Reduce_k1_classical"),
        IdentityCase(identity_id="Duality_Sumudu_Laplace"),
    ]
    a = run_suite(cases)
    b = run_suite(cases)
    assert [r.case.identity_id for r in a] == [
        "Duality_Sumudu_Laplace",
        "Reduce_k1_classical",
    ]
    assert [r.max_rel_err for r in a] == [r.max_rel_err for r in b]


def test_report_json_schema():
    cases = [
        IdentityCase(identity_id="Duality_Sumudu_Laplace"),
        IdentityCase(identity_id="SumuduLemma_3_5", params={"omega": -50.0}),
    ]
    reports = run_suite(cases, Grid1D.from_span(0.0, 2.0, 257))
    payload = json.loads(reports_to_json(reports))
    jsonschema.validate(payload, REPORT_SCHEMA)
    d = report_to_dict(reports[0])
    assert d["identity_id"] == "Duality_Sumudu_Laplace"
