"""Static SVG figures; the plotted samples are embedded in the file metadata.

Requires the optional ``matplotlib`` dependency.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# deterministic SVG ids and no creation date, so identical data gives identical files
matplotlib.rcParams["svg.hashsalt"] = "zenoheom"
matplotlib.rcParams["svg.fonttype"] = "none"


def _embed(x, y):
    return "\n".join(f"{a:.12g},{b:.12g}" for a, b in zip(x, y))


def _save(fig, path, title, data):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Title": title, "Description": data, "Date": None})
    plt.close(fig)
    return path


def plot_scan(scan, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(scan.tau, scan.gamma, "-", lw=1.5)
    if scan.maxima:
        ax.plot(scan.tau[scan.maxima], scan.gamma[scan.maxima], "v", ms=5, label="maxima")
    if scan.minima:
        ax.plot(scan.tau[scan.minima], scan.gamma[scan.minima], "^", ms=5, label="minima")
    if scan.maxima or scan.minima:
        ax.legend(frameon=False)
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel(r"$\Gamma(\tau)$")
    return _save(fig, path, "effective decay rate", _embed(scan.tau, scan.gamma))


def plot_dynamics(times, values, label, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(times, values, "-", lw=1.5)
    ax.set_xlabel("t")
    ax.set_ylabel(f"<{label}>")
    return _save(fig, path, label, _embed(times, values))


def plot_infoflow(flow, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(flow.times, flow.distance, "-", lw=1.5, label="distance")
    ax.plot(flow.times, flow.cum_loss, "--", lw=1, label="loss")
    ax.plot(flow.times, flow.cum_gain, ":", lw=1, label="gain")
    ax.legend(frameon=False)
    ax.set_xlabel("t")
    return _save(fig, path, "trace distance", _embed(flow.times, flow.distance))
