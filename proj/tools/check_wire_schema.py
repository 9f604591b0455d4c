#!/usr/bin/env python3
"""Checks the wire samples and recorded golden actions against the shared schema."""

import argparse
import json
import pathlib
import sys

import jsonschema


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("fixtures", type=pathlib.Path)
    args = ap.parse_args()

    schema = json.loads((args.fixtures / "schema" / "wire.schema.json").read_text())
    jsonschema.Draft7Validator.check_schema(schema)
    defs = schema["definitions"]

    def validator(name):
        return jsonschema.Draft7Validator({"$ref": f"#/definitions/{name}", "definitions": defs})

    inbound = validator("inbound_message")
    actions = validator("action_list")
    failures = 0

    for path in sorted((args.fixtures / "wire" / "valid").glob("*.json")):
        errs = list(inbound.iter_errors(json.loads(path.read_text())))
        if errs:
            failures += 1
            print(f"FAIL {path.name}: {errs[0].message}")
    for path in sorted((args.fixtures / "wire" / "invalid").glob("*.json")):
        if inbound.is_valid(json.loads(path.read_text())):
            failures += 1
            print(f"FAIL {path.name}: accepted")

    checked = 0
    for path in sorted((args.fixtures / "personas").glob("*.json")):
        for i, turn in enumerate(json.loads(path.read_text())["turns"]):
            golden = turn.get("expect", {}).get("actions")
            if golden is None:
                continue
            checked += 1
            errs = list(actions.iter_errors(golden))
            if errs:
                failures += 1
                print(f"FAIL {path.name} turn {i}: {errs[0].message}")
    if checked == 0:
        print("FAIL no golden actions found")
        failures += 1

    print(f"{'ok' if failures == 0 else 'failed'}: {checked} golden action lists, {failures} problem(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
