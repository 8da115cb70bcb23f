#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
#
# cfmimo: hybrid coherent/non-coherent cell-free massive MIMO downlink toolkit
# Copyright (C) 2026 The cfmimo Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------
"""Figures from the CSV files written by the cfmimo tool."""

import argparse
import csv
import math
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

CONVERGENCE_COLUMNS = ["iteration", "objective_bpsHz", "max_fronthaul_violation", "max_power_violation"]
SUMMARY_COLUMNS = ["p", "cmax_bpsHz", "serving_set_size", "mean_sum_rate", "stderr", "n_samples"]


class SchemaError(Exception):
    pass


def read_table(path, columns):
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file")
        if header != columns:
            raise SchemaError(f"{path}: expected columns {columns}, found {header}")
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if len(cells) != len(columns):
                raise SchemaError(f"{path}:{lineno}: expected {len(columns)} fields, found {len(cells)}")
            try:
                rows.append({c: float(v) for c, v in zip(columns, cells)})
            except ValueError as e:
                raise SchemaError(f"{path}:{lineno}: {e}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def plot_convergence(path):
    rows = read_table(path, CONVERGENCE_COLUMNS)
    fig, ax = plt.subplots()
    ax.plot([r["iteration"] for r in rows], [r["objective_bpsHz"] for r in rows], marker="o", label="sum rate")
    ax.set_xlabel("iteration")
    ax.set_ylabel("sum rate [bit/s/Hz]")
    ax.grid(True)
    ax.legend()
    return fig


def plot_sweep(path, group_by):
    rows = [r for r in read_table(path, SUMMARY_COLUMNS) if not math.isnan(r["mean_sum_rate"])]
    curves = defaultdict(list)
    for r in rows:
        curves[r[group_by]].append(r)
    fig, ax = plt.subplots()
    for key in sorted(curves):
        pts = sorted(curves[key], key=lambda r: r["p"])
        label = f"Cmax = {key:g}" if group_by == "cmax_bpsHz" else f"|M_k| = {int(key)}"
        ax.errorbar([r["p"] for r in pts], [r["mean_sum_rate"] for r in pts], yerr=[r["stderr"] for r in pts],
                    marker="o", capsize=3, label=label)
    ax.set_xlabel("CJT probability p")
    ax.set_ylabel("mean sum rate [bit/s/Hz]")
    ax.grid(True)
    ax.legend()
    return fig


KINDS = {
    "convergence": plot_convergence,
    "sweep-cmax": lambda path: plot_sweep(path, "cmax_bpsHz"),
    "sweep-serving": lambda path: plot_sweep(path, "serving_set_size"),
}


def make_figure(kind, path):
    return KINDS[kind](path)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("kind", choices=sorted(KINDS))
    parser.add_argument("csv")
    parser.add_argument("-o", "--output", required=True, help="image file (format from the extension)")
    args = parser.parse_args(argv)
    try:
        fig = make_figure(args.kind, args.csv)
    except (SchemaError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    fig.savefig(args.output, dpi=150, bbox_inches="tight")
    return 0


if __name__ == "__main__":
    sys.exit(main())
