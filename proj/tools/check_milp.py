#!/usr/bin/env python3
# Copyright 2026 The layersplit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Optional cross-check: solve exported programs with HiGHS and compare
against the graph solver. Needs `pip install highspy`; not part of ctest."""

import argparse
import json
import os
import subprocess
import sys
import tempfile

import highspy

SCENARIOS = [
    [],
    ["--objective", "energy"],
    ["--training", "--rho", "0.5"],
]


def run(cli, *args):
    p = subprocess.run([cli, *args], capture_output=True, text=True)
    return p.returncode, p.stdout


def milp_value(lp_path):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(lp_path)
    h.run()
    if h.modelStatusToString(h.getModelStatus()) != "Optimal":
        return None
    return h.getInfo().objective_function_value


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cli", default="build/tools/layersplit")
    ap.add_argument("--instance", action="append", default=[])
    ap.add_argument("--synth-layers", type=int, default=10)
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()

    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        docs = list(args.instance)
        for shape in ("discriminative", "generative", "autoencoder"):
            for seed in range(1, args.seeds + 1):
                path = os.path.join(tmp, f"{shape}-{seed}.json")
                run(args.cli, "synth", "--shape", shape, "--layers", str(args.synth_layers),
                    "--seed", str(seed), "--out", path)
                docs.append(path)
        lp = os.path.join(tmp, "model.lp")
        for doc in docs:
            for extra in SCENARIOS:
                code, out = run(args.cli, "solve", "--instance", doc, *extra)
                if code != 0:
                    print(f"skip {doc} {extra}: solve exit {code}")
                    continue
                graph = json.loads(out)["schedule"]["total_cost"]
                run(args.cli, "export-ilp", "--instance", doc, *extra, "--out", lp)
                value = milp_value(lp)
                ok = value is not None and abs(value - graph) <= 1e-6 * max(1.0, abs(graph))
                failures += not ok
                print(f"{'ok  ' if ok else 'FAIL'} {os.path.basename(doc)} {' '.join(extra) or '-'}:"
                      f" graph {graph} milp {value}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
