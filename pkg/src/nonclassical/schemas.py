"""JSON Schemas (draft 2020-12) for the reports the CLI emits."""

_NUM = {"type": "number"}
_NUM_LIST = {"type": "array", "items": _NUM}

STATS_REPORT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "StatsReport",
    "type": "object",
    "required": ["mean", "variance", "k", "mandel_q", "sub_poisson", "tol"],
    "additionalProperties": False,
    "properties": {
        "mean": _NUM,
        "variance": _NUM,
        "k": _NUM,
        "mandel_q": {"type": ["number", "null"]},
        "sub_poisson": {"type": "boolean"},
        "tol": {"type": "number", "exclusiveMinimum": 0},
    },
}

WITNESS_REPORT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "WitnessReport",
    "type": "object",
    "required": ["classical_feasible", "failing_minor", "cb_margin", "hankel_min_eigs", "tol", "moments", "fit"],
    "additionalProperties": False,
    "properties": {
        "classical_feasible": {"type": "boolean"},
        "failing_minor": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["matrix", "size", "eigenvalue"],
                    "properties": {
                        "matrix": {"enum": ["H0", "H1"]},
                        "size": {"type": "integer", "minimum": 1},
                        "eigenvalue": _NUM,
                    },
                },
            ]
        },
        "cb_margin": _NUM,
        "hankel_min_eigs": {
            "type": "object",
            "required": ["H0", "H1"],
            "properties": {"H0": _NUM_LIST, "H1": _NUM_LIST},
        },
        "tol": _NUM,
        "moments": {**_NUM_LIST, "minItems": 3},
        "fit": {
            "type": "object",
            "required": ["atoms", "atom_weights", "residual", "feasible", "tol", "grid_points", "grid_max"],
            "properties": {
                "atoms": _NUM_LIST,
                "atom_weights": _NUM_LIST,
                "residual": {"type": "number", "minimum": 0},
                "feasible": {"type": "boolean"},
                "tol": _NUM,
                "grid_points": {"type": "integer"},
                "grid_max": _NUM,
            },
        },
    },
}

LANDSCAPE_RESULT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "LandscapeResult",
    "type": "object",
    "required": ["min_k", "argmin", "method", "evaluations"],
    "additionalProperties": False,
    "properties": {
        "min_k": _NUM,
        "argmin": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
        "method": {"enum": ["vertex", "grid", "projected-gradient"]},
        "evaluations": {"type": "integer", "minimum": 0},
    },
}

CORRELATION_REPORT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "CorrelationReport",
    "type": "object",
    "required": ["model", "report", "schwarz_violation", "mean_intensity", "tau", "p_raw", "g2", "stderr"],
    "additionalProperties": False,
    "properties": {
        "model": {"type": "object", "required": ["kind"]},
        "report": {
            "type": "object",
            "required": ["antibunched", "witness_tau", "margin", "tolerance"],
            "properties": {
                "antibunched": {"type": "boolean"},
                "witness_tau": {"type": ["number", "null"]},
                "margin": _NUM,
                "tolerance": _NUM,
            },
        },
        "schwarz_violation": {"type": "boolean"},
        "mean_intensity": _NUM,
        "tau": _NUM_LIST,
        "p_raw": _NUM_LIST,
        "g2": _NUM_LIST,
        "stderr": {"oneOf": [{"type": "null"}, _NUM_LIST]},
    },
}

SERIES_CSV_COLUMNS = ("tau", "p_raw", "g2", "stderr")
