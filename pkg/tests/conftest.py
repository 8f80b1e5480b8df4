import numpy as np
import pytest
import torch

from avtse.model.config import ModelConfig
from avtse.training.losses import Batch

torch.set_num_threads(2)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance-gate test")
    for i in range(1, 12):
        config.addinivalue_line("markers", f"A{i}: acceptance criterion A{i}")


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            marker = None
            for m in getattr(report, "keywords", {}):
                if m.startswith("A") and m[1:].isdigit():
                    marker = m
            if marker:
                verdict = "PASS" if status == "passed" else "FAIL"
                lines[marker] = f"[{marker}] {verdict}  {report.nodeid.split('::')[-1]}"
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for key in sorted(lines, key=lambda k: int(k[1:])):
            terminalreporter.write_line(lines[key])


def tiny_config(**overrides):
    """Small geometry shared by most unit tests (kernel 16 / stride 8 @ 8 kHz)."""
    base = dict(
        n_channels=8,
        hidden_dim=4,
        chunk_size=8,
        layers_per_block=1,
        sample_rate=8000,
        visual_feature_dim=8,
        norm_kind="gLN",
        causal=False,
    )
    base.update(overrides)
    return ModelConfig(**base)


def tiny_batch(n_items=2, n_samples=328, n_frames=8, visual_dim=8, seed=0, dtype=torch.float32):
    g = torch.Generator().manual_seed(seed)
    return Batch(
        mixture=0.1 * torch.randn(n_items, n_samples, generator=g, dtype=dtype),
        target=0.1 * torch.randn(n_items, n_samples, generator=g, dtype=dtype),
        enrolment=0.1 * torch.randn(n_items, n_samples, generator=g, dtype=dtype),
        video=0.1 * torch.randn(n_items, n_frames, visual_dim, generator=g, dtype=dtype),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
