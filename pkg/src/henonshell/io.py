"""Bit-stable serialization of results and sweep tables.

Floats are printed with 17 significant digits (exact round-trip for doubles),
booleans as true/false, missing values as empty cells; JSON objects are
emitted with sorted keys.  All writes go through a temp file in the target
directory followed by an atomic replace, so a failed run never leaves a
partial file behind.
"""

import json
import os
import tempfile

import numpy as np

__all__ = [
    "SWEEP_COLUMNS",
    "atomic_write_text",
    "fmt_cell",
    "sweep_csv_text",
    "profile_csv_text",
    "result_payload",
]

SWEEP_COLUMNS = [
    "alpha", "R", "N", "p", "status",
    "S_rad", "S_full", "C_rad", "gap", "broken",
    "s_peak", "beta_peak", "asym_index",
    "scaled_S_full", "scaled_S_rad", "scaled_beta", "A_over_B",
    "nehari_residual", "pohozaev_residual", "ni_violation", "lemma3_slack",
]


def fmt_cell(value):
    """One CSV cell: 17 significant digits for floats, true/false, or empty."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def atomic_write_text(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sweep_csv_text(records):
    """CSV table for a list of SweepRecord, one row per alpha, sorted ascending."""
    lines = [",".join(SWEEP_COLUMNS)]
    for rec in sorted(records, key=lambda r: r.alpha):
        row = {
            "alpha": rec.params.alpha, "R": rec.params.R,
            "N": rec.params.N, "p": rec.params.p, "status": rec.status,
        }
        for name in SWEEP_COLUMNS[5:]:
            row[name] = getattr(rec, name)
        lines.append(",".join(fmt_cell(row[name]) for name in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"


def profile_csv_text(result):
    """Profile/field CSV: columns r,u for radial and interval results,
    r,theta,u for axisymmetric fields."""
    from .ball import BallResult  # local import to avoid a cycle
    lines = []
    if isinstance(result, BallResult) and result.field.grid.N >= 2:
        grid, vals = result.field.grid, result.field.values
        lines.append("r,theta,u")
        for i, r in enumerate(grid.r):
            for j, th in enumerate(grid.theta):
                lines.append(f"{fmt_cell(float(r))},{fmt_cell(float(th))},{fmt_cell(float(vals[i, j]))}")
    elif isinstance(result, BallResult):
        grid, vals = result.field.grid, result.field.values
        lines.append("r,u")
        for x, u in zip(grid.r, vals):
            lines.append(f"{fmt_cell(float(x))},{fmt_cell(float(u))}")
    else:
        grid, vals = result.profile.grid, result.profile.values
        lines.append("r,u")
        for x, u in zip(grid.nodes, vals):
            lines.append(f"{fmt_cell(float(x))},{fmt_cell(float(u))}")
    return "\n".join(lines) + "\n"


def _diag_dict(diag):
    if diag is None:
        return None
    return {
        "nehari_residual": diag.nehari_residual,
        "pohozaev_residual": diag.pohozaev_residual,
        "boundary_flux": diag.boundary_flux,
        "ni_violation": diag.ni_violation,
        "lemma1_slack": diag.lemma1_slack,
        "lemma2_slack": diag.lemma2_slack,
        "lemma3_slack": diag.lemma3_slack,
        "A_alpha": diag.A_alpha,
        "B_alpha": diag.B_alpha,
    }


def result_payload(result, config_echo, status="ok", error=None):
    """JSON-ready dict for one solve (radial or ball)."""
    from .ball import BallResult  # local import to avoid a cycle

    payload = {"config": config_echo, "status": status}
    if error is not None:
        payload["error"] = str(error)
        return payload
    params = result.params
    payload["problem"] = {
        "N": params.N, "p": params.p, "R": params.R, "alpha": params.alpha,
    }
    if isinstance(result, BallResult):
        payload["kind"] = "ball"
        payload["result"] = {
            "S_full": result.S_full,
            "C_full": result.C_full,
            "s_peak": result.s_peak,
            "beta_peak": result.beta_peak,
            "asym_index": result.asym_index,
            "starts_log": result.starts_log,
            "iterations": result.info.get("iterations"),
            "best_start": result.info.get("best_start"),
        }
    else:
        payload["kind"] = "radial"
        payload["result"] = {
            "S_rad": result.S_rad,
            "C_rad": result.C_rad,
            "s_peak": result.s_peak,
            "beta_peak": result.beta_peak,
            "iterations": result.info.get("iterations"),
            "diagnostics": _diag_dict(result.residuals),
        }
    return payload


def payload_json_text(payload):
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def load_radial_result(json_path, profile_path):
    """Re-read a radial solve from disk into a RadialResult.

    The profile CSV carries the grid nodes, so the result can be rebuilt and
    its diagnostics recomputed without the original config.
    """
    from .grids import radial_grid_from_nodes
    from .params import ProblemParams
    from .radial import DiagnosticReport, RadialProfile, RadialResult

    with open(json_path) as handle:
        payload = json.load(handle)
    if payload.get("kind") != "radial":
        raise ValueError(f"{json_path} does not hold a radial result")
    prob = payload["problem"]
    params = ProblemParams(N=prob["N"], p=prob["p"], R=prob["R"], alpha=prob["alpha"])
    rows = np.loadtxt(profile_path, delimiter=",", skiprows=1)
    grid = radial_grid_from_nodes(params.N, rows[:, 0])
    res = payload["result"]
    diag = DiagnosticReport(**res["diagnostics"])
    values = rows[:, 1]
    i_peak = int(np.argmax(values))
    return params, RadialResult(
        params=params,
        S_rad=res["S_rad"],
        C_rad=res["C_rad"],
        profile=RadialProfile(grid=grid, values=values),
        beta_peak=float(values[i_peak]),
        s_peak=float(grid.nodes[i_peak]),
        residuals=diag,
        info={},
    )
