# Copyright 2026 The Canvas Authors.
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

"""Runs emitted PyTorch modules against `canvas interpret` on sampled kernels."""

import argparse
import json
import math
import pathlib
import re
import subprocess
import sys
import tempfile

import torch


def run(cmd, ok=(0,)):
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode not in ok:
        sys.exit(f"{' '.join(map(str, cmd))} exited {proc.returncode}\n{proc.stderr}")
    return proc


def load_module(path):
    scope = {}
    exec(compile(path.read_text(), str(path), "exec"), scope)
    return scope["Kernel"]


def weight_order(template):
    return sorted((name for name, _ in template.named_parameters()),
                  key=lambda n: int(n[1:]))


def check(canvas, backbone, solved, target, tmp, seed):
    module_path = tmp / "module.py"
    run([canvas, "emit", "--kernel", solved, "--backbone", backbone, "--target", target["name"],
         "--format", "module-source", "--no-normalize", "--out", module_path])
    kernel = load_module(module_path)(normalize=False).double()
    gen = torch.Generator().manual_seed(seed)
    flat = []
    with torch.no_grad():
        for copy in kernel.copies:
            params = dict(copy.named_parameters())
            for name in weight_order(copy):
                p = params[name]
                p.copy_(torch.rand(p.shape, generator=gen, dtype=torch.float64) * 2 - 1)
                flat.append(p.detach().reshape(-1))
    x = torch.rand((1, target["C_in"], target["H"], target["W"]), generator=gen,
                   dtype=torch.float64) * 2 - 1
    with torch.no_grad():
        got = kernel(x).reshape(-1)

    (tmp / "in.txt").write_text(" ".join(repr(v) for v in x.reshape(-1).tolist()))
    weights = torch.cat(flat).tolist() if flat else []
    (tmp / "w.txt").write_text(" ".join(repr(v) for v in weights))
    out = run([canvas, "interpret", "--kernel", solved, "--backbone", backbone, "--target",
               target["name"], "--input", tmp / "in.txt", "--weights", tmp / "w.txt"]).stdout
    body = [l for l in out.splitlines() if not l.startswith("#")]
    want = torch.tensor([float(v) for v in " ".join(body).split()], dtype=torch.float64)
    params = sum(p.numel() for p in kernel.parameters())
    return float((got - want).abs().max()) if want.numel() == got.numel() else math.inf, params


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--canvas", required=True)
    ap.add_argument("--backbone", required=True)
    ap.add_argument("--kernels", type=int, default=50)
    ap.add_argument("--tolerance", type=float, default=1e-9)
    args = ap.parse_args()
    targets = [t for t in json.loads(pathlib.Path(args.backbone).read_text())["targets"]
               if max(t["C_in"], t["C_out"]) % min(t["C_in"], t["C_out"]) == 0]

    checked, worst = 0, 0.0
    with tempfile.TemporaryDirectory() as d:
        tmp = pathlib.Path(d)
        run([args.canvas, "sample", "--nodes", "8", "--count", str(3 * args.kernels), "--seed",
             "17", "--out", tmp / "sampled"])
        for i, path in enumerate(sorted((tmp / "sampled").glob("*.cir"))):
            if checked >= args.kernels:
                break
            solved = tmp / "solved.cir"
            report = tmp / "report.json"
            if run([args.canvas, "solve", "--backbone", args.backbone, "--kernel", path,
                    "--flops-frac", "0.5", "--out", solved, "--report", report],
                   ok=(0, 3)).returncode != 0:
                continue
            target = targets[i % len(targets)]
            err, params = check(args.canvas, args.backbone, solved, target, tmp, i)
            if not math.isfinite(err) and "exp" in solved.read_text():
                continue  # overflow on random inputs
            rows = json.loads(report.read_text())["targets"]
            want_params = next(r["kernel_params"] for r in rows if r["name"] == target["name"])
            if err > args.tolerance or params != want_params:
                sys.exit(f"{path.name} on {target['name']}: max error {err}, params {params} "
                         f"vs {want_params}")
            worst = max(worst, err)
            checked += 1
    if checked < args.kernels:
        sys.exit(f"only {checked} kernels solved")
    print(f"{checked} kernels, max abs error {worst:.3g}, parameter counts exact")


if __name__ == "__main__":
    main()
