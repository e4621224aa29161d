#!/usr/bin/env python3
"""Solve an LP-format model written by `rscsa ilp-export` with scipy's HiGHS MILP.

Prints `status <text>` and `objective <value>`; with --values, also every
nonzero variable as `name=value`. With --check FILE nothing is solved: the
`name=value` assignment in FILE is evaluated against the model, each violated
row or bound is printed, and the exit code is 3 when any is violated.
"""
import argparse
import re
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import lil_matrix

TERM = re.compile(r"([+-])?\s*(\d+(?:\.\d+)?)?\s*([A-Za-z_][A-Za-z0-9_]*)")


def parse_expr(text):
    terms = []
    for sign, coef, name in TERM.findall(text):
        c = float(coef) if coef else 1.0
        terms.append((-c if sign == "-" else c, name))
    return terms


def parse(path):
    sections = {"objective": [], "constraints": [], "bounds": [], "binaries": [], "generals": []}
    current = None
    sense = 1.0
    buf = []

    def flush():
        if buf and current in ("objective", "constraints"):
            sections[current].append(" ".join(buf))
        buf.clear()

    for raw in open(path):
        line = raw.split("\\", 1)[0].rstrip()
        if not line.strip():
            continue
        head = line.strip().lower()
        if not line[0].isspace():
            flush()
            if head in ("minimize", "maximize"):
                current, sense = "objective", (1.0 if head == "minimize" else -1.0)
            elif head in ("subject to", "st", "s.t."):
                current = "constraints"
            elif head == "bounds":
                current = "bounds"
            elif head in ("binaries", "binary"):
                current = "binaries"
            elif head in ("generals", "general"):
                current = "generals"
            elif head == "end":
                current = None
            continue
        if current in ("objective", "constraints"):
            if line.startswith(" ") and not line.startswith("  ") and ":" in line:
                flush()
            buf.append(line.strip())
        elif current == "bounds":
            sections["bounds"].append(line.strip())
        elif current in ("binaries", "generals"):
            sections[current].extend(line.split())
    flush()
    return sense, sections


def build(sense, sec):
    names = {}

    def idx(n):
        if n not in names:
            names[n] = len(names)
        return names[n]

    obj_terms = []
    for text in sec["objective"]:
        body = text.split(":", 1)[1] if ":" in text else text
        obj_terms += parse_expr(body)
    rows = []
    for text in sec["constraints"]:
        label, body = text.split(":", 1)
        m = re.match(r"(.*?)(<=|>=|=)\s*(-?\d+(?:\.\d+)?)\s*$", body)
        if not m:
            sys.exit(f"cannot parse constraint {label}")
        rows.append((label.strip(), parse_expr(m.group(1)), m.group(2), float(m.group(3))))
    for _, name in obj_terms:
        idx(name)
    for _, terms, _, _ in rows:
        for _, name in terms:
            idx(name)
    for n in sec["binaries"] + sec["generals"]:
        idx(n)
    n = len(names)
    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    for b in sec["bounds"]:
        m = re.match(r"(-?\d+(?:\.\d+)?)\s*<=\s*(\S+)\s*<=\s*(-?\d+(?:\.\d+)?)", b)
        if m:
            i = idx(m.group(2))
            lo[i], hi[i] = float(m.group(1)), float(m.group(3))
    integrality = np.zeros(n)
    for v in sec["binaries"]:
        integrality[names[v]] = 1
        hi[names[v]] = min(hi[names[v]], 1.0)
    for v in sec["generals"]:
        integrality[names[v]] = 1
    c = np.zeros(n)
    for coef, name in obj_terms:
        c[names[name]] += sense * coef
    a = lil_matrix((len(rows), n))
    rlo = np.full(len(rows), -np.inf)
    rhi = np.full(len(rows), np.inf)
    for k, (_, terms, op, rhs) in enumerate(rows):
        for coef, name in terms:
            a[k, names[name]] += coef
        if op in ("<=", "="):
            rhi[k] = rhs
        if op in (">=", "="):
            rlo[k] = rhs
    return names, c, a.tocsr(), rlo, rhi, lo, hi, integrality, sense


def check(path, names, c, a, rlo, rhi, lo, hi, integrality, sense):
    x = np.zeros(len(names))
    for raw in open(path):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, value = line.split("=", 1)
        if name.strip() not in names:
            print(f"unknown variable {name.strip()}")
            return 3
        x[names[name.strip()]] = float(value)
    bad = 0
    rows = a @ x
    for k in range(len(rows)):
        if rows[k] < rlo[k] - 1e-6 or rows[k] > rhi[k] + 1e-6:
            print(f"row {k}: {rows[k]:g} outside [{rlo[k]:g}, {rhi[k]:g}]")
            bad += 1
    for name, i in names.items():
        if x[i] < lo[i] - 1e-6 or x[i] > hi[i] + 1e-6:
            print(f"bound {name}={x[i]:g} outside [{lo[i]:g}, {hi[i]:g}]")
            bad += 1
        if integrality[i] and abs(x[i] - round(x[i])) > 1e-6:
            print(f"integrality {name}={x[i]:g}")
            bad += 1
    print("status " + ("feasible" if bad == 0 else f"{bad} violations"))
    print(f"objective {sense * float(c @ x):g}")
    return 3 if bad else 0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("model")
    ap.add_argument("--time-limit", type=float, default=300.0)
    ap.add_argument("--values", action="store_true")
    ap.add_argument("--check", metavar="FILE")
    args = ap.parse_args()
    names, c, a, rlo, rhi, lo, hi, integrality, sense = build(*parse(args.model))
    if args.check:
        sys.exit(check(args.check, names, c, a, rlo, rhi, lo, hi, integrality, sense))
    cons = [LinearConstraint(a, rlo, rhi)] if a.shape[0] else []
    res = milp(c, constraints=cons, bounds=Bounds(lo, hi), integrality=integrality,
               options={"time_limit": args.time_limit})
    print(f"status {res.message}")
    if res.x is None:
        sys.exit(1)
    print(f"objective {sense * res.fun:g}")
    if args.values:
        for name, i in names.items():
            if abs(res.x[i]) > 1e-6:
                print(f"{name}={round(res.x[i])}")
    if res.status != 0:
        sys.exit(2)


if __name__ == "__main__":
    main()
