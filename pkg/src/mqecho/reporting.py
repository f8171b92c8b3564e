"""Result emission: delimited series, JSON summaries, and figures.

Every file carries the effective-config hash and tool version so outputs
are traceable and byte-reproducible for a fixed config and seed.  Numbers
are written with 17 significant digits, enough to round-trip doubles, so
downstream comparisons reproduce the built-in invariant checks exactly.

Figures are rendered with the Agg backend straight to files next to the
delimited output; matplotlib is imported lazily so library use of the
simulation modules never pulls in a plotting stack.
"""

from __future__ import annotations

import json
import os

import numpy as np

from . import __version__


def _fmt(x) -> str:
    if isinstance(x, (str, np.str_)):
        return str(x)
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _meta_lines(meta: dict) -> list:
    lines = [f"# tool: mqecho {__version__}"]
    for key in sorted(meta):
        lines.append(f"# {key}: {meta[key]}")
    return lines


def write_csv(path, columns: dict, meta: dict) -> str:
    """Write named columns as comma-separated text with `#` header lines."""
    names = list(columns)
    series = [np.atleast_1d(np.asarray(columns[name])) for name in names]
    length = len(series[0])
    if any(len(s) != length for s in series):
        raise ValueError("all columns must have the same length")
    lines = _meta_lines(meta)
    lines.append(",".join(names))
    for i in range(length):
        lines.append(",".join(_fmt(s[i]) for s in series))
    payload = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(payload)
    return str(path)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path, payload: dict, meta: dict) -> str:
    doc = {"tool": f"mqecho {__version__}", **meta, **_plain(payload)}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return str(path)


def write_series(out_dir, name, columns: dict, meta: dict, fmt: str) -> str:
    """Write a series as CSV or as a JSON column dict, per the output format."""
    os.makedirs(out_dir, exist_ok=True)
    if fmt == "json":
        path = os.path.join(out_dir, f"{name}.json")
        return write_json(path, {"columns": {k: np.asarray(v).tolist()
                                             for k, v in columns.items()}}, meta)
    path = os.path.join(out_dir, f"{name}.csv")
    return write_csv(path, columns, meta)


def spectrum_columns(spec) -> dict:
    """Two-column table for an intensity spectrum (order or frequency)."""
    from .coherence import MQSpectrum, VSpectrum

    if isinstance(spec, MQSpectrum):
        return {"order": spec.orders, "intensity": spec.intensities}
    if isinstance(spec, VSpectrum):
        return {"frequency": spec.frequencies, "intensity": spec.intensities}
    raise TypeError(f"expected MQSpectrum or VSpectrum, got {type(spec)!r}")


def write_spectrum_csv(path, spec, meta: dict | None = None) -> str:
    meta = dict(meta or {})
    meta.setdefault("norm", _fmt(spec.norm))
    if spec.time is not None:
        meta.setdefault("time", _fmt(spec.time))
    return write_csv(path, spectrum_columns(spec), meta)


def write_spectrum_json(path, spec, meta: dict | None = None) -> str:
    cols = spectrum_columns(spec)
    payload = {
        "norm": spec.norm,
        "time": spec.time,
        **{k: np.asarray(v).tolist() for k, v in cols.items()},
    }
    if hasattr(spec, "tol"):
        payload["binning_tol"] = spec.tol
    return write_json(path, payload, dict(meta or {}))


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

_FIG_METADATA = {"Software": f"mqecho {__version__}"}


def _get_axes():
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    return plt, fig, ax


def _save(plt, fig, path) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_FIG_METADATA)
    plt.close(fig)
    return str(path)


def figure_mq_spectrum(path, orders, intensities, title="MQ intensities"):
    plt, fig, ax = _get_axes()
    ax.bar(orders, intensities, width=0.8, color="#336699")
    ax.set_xlabel("coherence order n")
    ax.set_ylabel("intensity $I_n$")
    ax.set_yscale("log")
    floor = max(1e-16, float(np.min(intensities[intensities > 0], initial=1e-16)))
    ax.set_ylim(bottom=max(floor * 0.5, 1e-16))
    ax.set_title(title)
    return _save(plt, fig, path)


def figure_mq_evolution(path, times, orders, matrix, title="MQ intensities vs time"):
    """matrix: len(orders) x len(times) intensity table."""
    plt, fig, ax = _get_axes()
    for row, n in zip(matrix, orders):
        if np.max(row) > 1e-12:
            ax.plot(times, row, label=f"n={n}")
    ax.set_xlabel("time")
    ax.set_ylabel("intensity $I_n(t)$")
    ax.legend(fontsize=8, ncol=2)
    ax.set_title(title)
    return _save(plt, fig, path)


def figure_echo_sweep(path, deltas, amplitudes, title="Echo vs kick angle"):
    plt, fig, ax = _get_axes()
    ax.plot(deltas, amplitudes, "o-", color="#aa3311")
    ax.set_xlabel(r"kick angle $\delta$")
    ax.set_ylabel(r"echo amplitude $M(2\tau)$")
    ax.set_title(title)
    return _save(plt, fig, path)


def figure_m2_growth(path, taus, m2, slope=None, intercept=None,
                     title="Second-moment growth"):
    plt, fig, ax = _get_axes()
    ax.plot(taus, m2, "o-", label="measured $m_2(\\tau)$")
    if slope is not None:
        taus = np.asarray(taus)
        ref = slope * taus + (intercept if intercept is not None else 0.0)
        ax.plot(taus, ref, "--", label="predicted slope")
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel(r"$m_2$")
    ax.legend()
    ax.set_title(title)
    return _save(plt, fig, path)


def figure_partial_echo(path, times, magnitude, baseline, tau,
                        title="Partial echo"):
    plt, fig, ax = _get_axes()
    ax.plot(times, baseline, color="#999999", lw=0.8, label="no-pulse")
    ax.plot(times, magnitude, color="#223388", lw=1.0, label="echo run")
    ax.axvline(2.0 * tau, color="#aa3311", ls=":", label=r"$t = 2\tau$")
    ax.set_xlabel("time")
    ax.set_ylabel("|transverse magnetization|")
    ax.legend()
    ax.set_title(title)
    return _save(plt, fig, path)


def figure_spin_diffusion(path, times, polarizations, source, equilibrium,
                          title="Spin diffusion"):
    plt, fig, ax = _get_axes()
    for i, row in enumerate(polarizations):
        style = {"lw": 1.6, "color": "#aa3311"} if i == source else {"lw": 0.8}
        ax.plot(times, row, label=f"site {i}", **style)
    ax.axhline(equilibrium, color="#333333", ls=":", label="1/N")
    ax.set_xlabel("time")
    ax.set_ylabel("site polarization $P_i(t)$")
    ax.legend(fontsize=8, ncol=2)
    ax.set_title(title)
    return _save(plt, fig, path)


def figure_correlations(path, times, correlations: dict,
                        title="Harmonic correlation functions"):
    plt, fig, ax = _get_axes()
    for n, series in sorted(correlations.items()):
        series = np.asarray(series)
        if np.abs(series).max() > 1e-14:
            ax.plot(times, series.real, label=f"n={n}", lw=0.9)
    ax.set_xlabel("time")
    ax.set_ylabel(r"$g_n(t)$")
    ax.legend(fontsize=8)
    ax.set_title(title)
    return _save(plt, fig, path)
