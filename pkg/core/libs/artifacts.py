import csv
import json
import logging
import math
import os

import settings

logger = logging.getLogger('cookiewalk.libs.artifacts')


def provenance(config) -> dict:
    return {"tool": "cookiewalk",
            "version": settings.VERSION,
            "schema_version": settings.SCHEMA_VERSION,
            "config_hash": config.config_hash}


def clean(value):
    """
    Make a payload strict JSON: nan becomes null, infinities become strings, tuples lists
    """
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {str(k): clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    if hasattr(value, "item"):
        return clean(value.item())
    return value


def artifact_path(config, suffix: str, extension: str) -> str:
    os.makedirs(config.output_dir, exist_ok=True)
    return os.path.join(config.output_dir, "{0}_{1}.{2}".format(config.name, suffix, extension))


def write_json(config, suffix: str, payload: dict) -> str:
    """
    Write payload with provenance under "meta"
    :return: path written
    """
    path = artifact_path(config, suffix, "json")
    document = {"meta": provenance(config), "config": config.to_json(), "result": clean(payload)}
    with open(path, "w", newline="\n") as output:
        json.dump(document, output, indent=2, sort_keys=True, allow_nan=False)
        output.write("\n")
    logger.info("Wrote {0}".format(path))
    return path


def _cell(value):
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return value


def write_csv(config, suffix: str, header: list, rows) -> str:
    """
    Write a plain RFC 4180 table, header first. The provenance goes to a
    <table>.csv.meta.json sidecar next to it.
    :return: path written
    """
    path = artifact_path(config, suffix, "csv")
    sidecar = {"meta": provenance(config), "config": config.to_json(), "columns": list(header)}
    with open(path + ".meta.json", "w", newline="\n") as output:
        json.dump(clean(sidecar), output, indent=2, sort_keys=True, allow_nan=False)
        output.write("\n")
    with open(path, "w", newline="") as output:
        writer = csv.writer(output)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    logger.info("Wrote {0}".format(path))
    return path


def write_table(config, suffix: str, header: list, rows) -> str:
    """
    CSV or a JSON list of records, following the configured output format
    """
    if config.output_format == "json":
        return write_json(config, suffix, {"columns": header, "rows": [list(row) for row in rows]})
    return write_csv(config, suffix, header, rows)
