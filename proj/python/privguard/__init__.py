"""Classify outbound HTTP requests as privacy-invasive or benign.

Thin Python surface over the C++ core: ingest captured traffic, build the
feature dataset, fit and persist models, and query them the way the HTTP
service does.
"""

import json as _json
import os as _os
import subprocess as _subprocess
import sys as _sys

from ._core import (
    BundleError,
    DataError,
    Error,
    FeatureSchema,
    LabeledRecord,
    ModelBundle,
    ParseError,
    PayloadProfile,
    PredictService,
    RawRequest,
    ScreenVerdict,
    ServiceUnavailable,
    UnsupportedVerbError,
    ValidationError,
    build_schema,
    clean_records,
    compute_metrics,
    confusion_matrix,
    default_suspect_keys,
    emit_blocklist,
    encode_record,
    export_dataset_csv,
    fit,
    gini_impurity,
    hinge_objective,
    load_bundle,
    logistic,
    make_schema,
    parse_curl_file,
    parse_dataset_csv,
    parse_har,
    profile_payload,
    run_cli,
    screen_request,
    split_indices,
)

__version__ = "0.1.0"


def predict(service, route, dto):
    """Send a DTO dict to `route` ("lr", "dt" or "svm"); returns (status, reply dict)."""
    status, body = service.dispatch(route, _json.dumps(dto))
    return status, _json.loads(body)


def _cli():
    """Console entry point: forwards to the bundled `privguard` executable."""
    exe = _os.path.join(_os.path.dirname(__file__), "bin", "privguard")
    if not _os.path.exists(exe):
        code, out, err = run_cli(_sys.argv[1:], _sys.stdin.read() if "label" in _sys.argv[1:2] else "")
        _sys.stdout.write(out)
        _sys.stderr.write(err)
        raise SystemExit(code)
    raise SystemExit(_subprocess.call([exe, *_sys.argv[1:]]))
