"""Evaluation metric: SI-SDR improvement over the unprocessed mixture."""

from __future__ import annotations

import numpy as np

from ..training.losses import SI_SDR_EPS, si_sdr_numpy


def si_sdri(mixture, estimate, reference, eps=SI_SDR_EPS) -> float:
    """SI-SDR(estimate, reference) - SI-SDR(mixture, reference), in dB.

    Accepts 1-D arrays or AudioWaveform-like objects with ``.samples``.
    """
    mix = getattr(mixture, "samples", mixture)
    est = getattr(estimate, "samples", estimate)
    ref = getattr(reference, "samples", reference)
    mix = np.asarray(mix, dtype=np.float64)
    est = np.asarray(est, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    return si_sdr_numpy(est, ref, eps) - si_sdr_numpy(mix, ref, eps)
