"""JSON Schemas (draft-07) for the report files written by the pipeline."""

_int = {"type": "integer"}
_num = {"type": "number"}
_shot = {
    "type": "object",
    "required": ["id", "start", "end"],
    "properties": {"id": _int, "start": _int, "end": _int},
}

SHOTS = {
    "type": "object",
    "required": ["num_frames", "policy", "shots"],
    "properties": {
        "num_frames": _int,
        "policy": {
            "type": "object",
            "required": ["mode", "tau", "alpha"],
            "properties": {"mode": {"enum": ["fixed", "adaptive"]}, "tau": _num, "alpha": _num},
        },
        "shots": {"type": "array", "items": _shot},
    },
}

KEYFRAMES = {
    "type": "object",
    "required": ["shots"],
    "properties": {
        "shots": {
            "type": "array",
            "items": {
                **_shot,
                "required": ["id", "start", "end", "keyframes"],
                "properties": {
                    **_shot["properties"],
                    "keyframes": {"type": "array", "items": _int, "minItems": 3, "maxItems": 3},
                },
            },
        }
    },
}

DESCRIPTORS = {
    "type": "object",
    "required": ["bins_per_channel", "dim", "descriptors"],
    "properties": {
        "bins_per_channel": {"type": ["integer", "null"]},
        "dim": _int,
        "descriptors": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["shot", "values"],
                "properties": {"shot": _int, "values": {"type": "array", "items": _num}},
            },
        },
    },
}

CLUSTERS = {
    "type": "object",
    "required": ["k", "objective", "moves", "trace", "assignment", "seed"],
    "properties": {
        "k": _int,
        "objective": _num,
        "moves": _int,
        "trace": {"type": "array", "items": _num},
        "assignment": {"type": "array", "items": _int},
        "seed": _int,
    },
}

GROUPS = {
    "type": "object",
    "required": ["merges", "labels"],
    "properties": {
        "merges": {
            "type": "array",
            "items": {
                "type": "array",
                "items": [_int, _int, _num],
                "minItems": 3,
                "maxItems": 3,
            },
        },
        "labels": {"type": "array", "items": _int},
    },
}

QUERY = {
    "type": "object",
    "required": ["query", "results"],
    "properties": {
        "query": {"type": "string"},
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["shot", "score"],
                "properties": {"shot": _int, "score": _num},
            },
        },
    },
}

RUN = {
    "type": "object",
    "required": ["config", "num_frames", "num_shots", "timings"],
    "properties": {
        "config": {"type": "object"},
        "num_frames": _int,
        "num_shots": _int,
        "timings": {"type": "object", "additionalProperties": _num},
    },
}

BY_FILE = {
    "shots.json": SHOTS,
    "keyframes.json": KEYFRAMES,
    "descriptors.json": DESCRIPTORS,
    "clusters.json": CLUSTERS,
    "groups.json": GROUPS,
    "run.json": RUN,
}
