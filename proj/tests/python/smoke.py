"""End-to-end smoke test for the Python bindings (and the CLI, when its path
is supplied via ROUTH_SMOKE_CLI)."""

import json
import os
import subprocess
import sys

import routh

MODEL = json.dumps(
    {
        "n": 5,
        "K_z": 1.0,
        "dK_dnu": 1.0,
        "hessK1": [2, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1],
    }
)


def check(label, ok):
    print(("ok   " if ok else "FAIL ") + label)
    return bool(ok)


def main():
    results = []

    doc = json.loads(routh.constants(5))
    results.append(check("constants cbar", abs(doc["closed_form"]["cbar"] - 0.1875) < 1e-15))
    results.append(check("constants dual oracle", doc["max_rel_diff"] <= 1e-8))

    raw = routh.critical_points(MODEL, m=2, seeds=8, seed=0)
    pts = json.loads(raw)
    results.append(check("critical points found", pts["count"] >= 1))
    results.append(
        check(
            "closed-form point present",
            any(p["method"] == "closed_form" for p in pts["critical_points"]),
        )
    )
    results.append(
        check("bindings deterministic", routh.critical_points(MODEL, m=2, seeds=8, seed=0) == raw)
    )

    cfg = json.loads(routh.configure(MODEL, eps=1e-3, m=2))
    results.append(check("ensemble in neighborhood", cfg["m_eps"]["ok"] is True))
    expected = cfg["concentration_scale"]
    results.append(
        check(
            "rate identity",
            all(abs(v / expected - 1.0) < 1e-12 for v in cfg["lambda_inv_over_eps"]),
        )
    )

    value = routh.eval_hamiltonian(MODEL, json.dumps([[1, 0, 0, 0], [-1, 0, 0, 0]]))
    results.append(check("hamiltonian finite", value == value))

    try:
        routh.constants(4)
        results.append(check("dimension validation", False))
    except ValueError:
        results.append(check("dimension validation", True))

    cli = os.environ.get("ROUTH_SMOKE_CLI")
    if cli:
        out = subprocess.run(
            [cli, "constants", "--n", "5"], capture_output=True, text=True, check=True
        )
        doc = json.loads(out.stdout)
        results.append(check("cli constants cbar", doc["quadrature"]["cbar"] == 0.1875))
        bad = subprocess.run([cli, "constants", "--n", "4"], capture_output=True, text=True)
        results.append(check("cli usage exit code", bad.returncode == 2))

    if not all(results):
        sys.exit(1)
    print("smoke ok")


if __name__ == "__main__":
    main()
