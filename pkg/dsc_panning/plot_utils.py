from typing import Mapping

import matplotlib

matplotlib.use("Agg")
from matplotlib import pyplot as plt
import numpy as np

from .model import ImpulseResponse


def plot_ir_analysis(irs: Mapping[str, ImpulseResponse], truncated: Mapping[str, ImpulseResponse], out_path,
                     max_time_s: float = 0.05):
    """
    Impulse responses in dB of their magnitude (one subplot per IR) with the frequency-dependent
    truncated response overlaid.
    """
    fig, axes = plt.subplots(len(irs), 1, figsize=(8, 2.5 * len(irs)), sharex=True, squeeze=False)
    for ax, (name, ir) in zip(axes[:, 0], irs.items()):
        nb_samples = min(ir.num_samples, int(max_time_s * ir.sample_rate_hz))
        time_ms = np.arange(nb_samples) / ir.sample_rate_hz * 1e3
        floor = np.abs(ir.samples).max() * 1e-6
        ax.plot(time_ms, 20 * np.log10(np.abs(ir.samples[:nb_samples]) + floor), lw=0.6, label="full")
        if name in truncated:
            ax.plot(time_ms, 20 * np.log10(np.abs(truncated[name].samples[:nb_samples]) + floor),
                    lw=0.6, label="direct (FDT)")
        if ir.onset_index is not None:
            ax.axvline(ir.onset_index / ir.sample_rate_hz * 1e3, color="k", ls="--", lw=0.8)
        ax.set_title(name)
        ax.set_ylabel("dB")
        ax.legend(loc="upper right")
    axes[-1, 0].set_xlabel("time (ms)")
    plt.tight_layout()
    plt.savefig(out_path, dpi=200)
    plt.close(fig)
