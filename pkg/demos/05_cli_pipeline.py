"""Reproducible experiment pipeline through the command-line interface.

Generates a path, runs the scaled-QV and roughness analyses on it, and
bundles the reports — every artifact paired with a manifest recording the
config, library versions, and input digests.  Re-running a step with the
same config produces byte-identical report JSON.
"""

import json
import os
import subprocess
import tempfile


def run(*argv):
    print("$ " + " ".join(argv))
    proc = subprocess.run(argv, capture_output=True, text=True)
    for line in proc.stdout.strip().splitlines():
        print("  " + line)
    if proc.returncode != 0:
        print("  stderr: " + proc.stderr.strip())
    return proc


with tempfile.TemporaryDirectory() as tmp:
    path_csv = os.path.join(tmp, "path.csv")
    sqv_json = os.path.join(tmp, "sqv.json")
    rough_json = os.path.join(tmp, "rough.json")
    bundle = os.path.join(tmp, "bundle.json")

    run("roughvar", "gen", "--kind", "takagi", "--H", "0.5", "--level", "14",
        "--out", path_csv)
    run("roughvar", "sqv", "--in", path_csv, "--p", "2", "--levels", "2:12",
        "--out", sqv_json)
    run("roughvar", "roughness", "--in", path_csv, "--levels", "6:12",
        "--iters", "10", "--out", rough_json)
    run("roughvar", "report", "--in", sqv_json, rough_json, "--out", bundle)

    manifest = json.load(open(os.path.join(tmp, "sqv.manifest.json")))
    print("\nmanifest for the sqv step:")
    print(f"  command:  {manifest['command']}")
    print(f"  versions: {manifest['versions']}")
    print(f"  inputs:   {list(manifest['inputs'])}")

    # byte stability: run the same analysis again and compare
    again = os.path.join(tmp, "sqv_again.json")
    subprocess.run(["roughvar", "sqv", "--in", path_csv, "--p", "2",
                    "--levels", "2:12", "--out", again], capture_output=True)
    same = open(sqv_json, "rb").read() == open(again, "rb").read()
    print(f"\nre-run report JSON byte-identical: {same}")
