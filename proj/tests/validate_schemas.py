"""Runs the CLI in JSON mode and validates each output against the shipped schemas."""

import json
import os
import subprocess
import sys
import tempfile

import jsonschema


def run(cli, *args):
    proc = subprocess.run([cli, *args], capture_output=True, text=True, check=False)
    if proc.returncode != 0:
        sys.exit(f"{' '.join(args)}: exit {proc.returncode}\n{proc.stderr}")
    return proc.stdout


def check(schema_dir, name, doc):
    with open(os.path.join(schema_dir, name), encoding="utf-8") as f:
        schema = json.load(f)
    jsonschema.validate(doc, schema, cls=jsonschema.Draft202012Validator)
    print(f"ok  {name}")


def main():
    cli, schema_dir, config_dir = sys.argv[1:4]
    with tempfile.TemporaryDirectory() as tmp:
        pair = os.path.join(tmp, "pair.csv")
        run(cli, "simulate", "--kind", "jw_circ_circ", "--param", "0.8", "--n", "60", "--seed", "3", "--out", pair)
        for method in ("rayleigh", "pycke"):
            for direction in ("auto", "sum"):
                out = run(cli, "test", pair, "--kind1", "circular", "--kind2", "circular", "--method", method,
                          "--direction", direction, "--pycke-reps", "1000", "--json")
                check(schema_dir, "test_result.schema.json", json.loads(out))

        tiny = os.path.join(tmp, "tiny.csv")
        with open(tiny, "w", encoding="utf-8") as f:
            f.write("a,b\n1,2\n2,1\n3,3\n")
        doc = json.loads(run(cli, "test", tiny, "--method", "rayleigh", "--json"))
        check(schema_dir, "test_result.schema.json", doc)
        assert doc["lambda_hat"] is None

        angles = os.path.join(tmp, "angles.csv")
        with open(pair, encoding="utf-8") as src, open(angles, "w", encoding="utf-8") as dst:
            for line in src:
                dst.write(line.split(",")[0] + "\n")
        for degree in ("0", "2"):
            doc = json.loads(run(cli, "fit", angles, "--M", degree, "--json"))
            check(schema_dir, "fit_result.schema.json", doc)
            check(schema_dir, "nnts_params.schema.json", doc["params"])

        csv = os.path.join(tmp, "smoke.csv")
        js = os.path.join(tmp, "smoke.json")
        doc = json.loads(run(cli, "power", "--config", os.path.join(config_dir, "smoke.json"),
                             "--out-csv", csv, "--out-json", js, "--json"))
        check(schema_dir, "power_result.schema.json", doc)
        with open(js, encoding="utf-8") as f:
            check(schema_dir, "power_result.schema.json", json.load(f))


if __name__ == "__main__":
    main()
