"""Latency harness: per-sentence wall-clock timing at batch size 1 on CPU.

Times the full per-sentence call (featurization included, file parsing
excluded) around a user-supplied callable, with warmup, multiple
repetitions, and percentile statistics.  If single calls are too fast for
the monotonic timer, calls are looped k times per sample and k is reported.
"""

from __future__ import annotations

import json
import math
import os
import platform
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .corpus import Sentence


@dataclass
class LatencyReport:
    mean_ms: float
    p50_ms: float
    p95_ms: float
    p99_ms: float
    stddev_ms: float
    min_ms: float
    max_ms: float
    per_repetition_means_ms: List[float]
    n_sentences: int
    repetitions: int
    warmup_n: int
    k_loop: int
    env: dict = field(default_factory=dict)
    samples_ms: Optional[List[float]] = None

    def to_json(self, include_samples: bool = False) -> dict:
        doc = {k: v for k, v in vars(self).items() if k != "samples_ms"}
        if include_samples and self.samples_ms is not None:
            doc["samples_ms"] = self.samples_ms
        return doc


def _timer_resolution_ns() -> int:
    best = None
    for _ in range(2000):
        a = time.perf_counter_ns()
        b = time.perf_counter_ns()
        if b > a and (best is None or b - a < best):
            best = b - a
    return best or 1


def bench_latency(
    system_fn: Callable[[Sentence], object],
    sentences: Sequence[Sentence],
    warmup_n: int = 50,
    measure_n: Optional[int] = None,
    repetitions: int = 3,
    min_sample_to_resolution: int = 100,
) -> LatencyReport:
    """Measure per-sentence latency of ``system_fn`` (one sentence per call).

    Runs ``warmup_n`` untimed calls, then ``repetitions`` timed passes over
    the first ``measure_n`` sentences.  Each sample must span at least
    ``min_sample_to_resolution`` timer ticks; otherwise calls are looped in
    groups of k per sample, with k recorded in the report.
    """
    if not sentences:
        raise ValueError("empty benchmark corpus")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    timed = list(sentences[:measure_n] if measure_n else sentences)

    for i in range(warmup_n):
        system_fn(sentences[i % len(sentences)])

    resolution = _timer_resolution_ns()
    probe_start = time.perf_counter_ns()
    system_fn(timed[0])
    probe = max(time.perf_counter_ns() - probe_start, 1)
    k_loop = 1
    if probe < resolution * min_sample_to_resolution:
        k_loop = math.ceil(resolution * min_sample_to_resolution / probe)
        import logging

        logging.getLogger(__name__).warning(
            "timer resolution %d ns too coarse for ~%d ns calls; looping k=%d calls per sample",
            resolution,
            probe,
            k_loop,
        )

    samples_ms: List[float] = []
    rep_means: List[float] = []
    for _ in range(repetitions):
        rep_samples = []
        for sentence in timed:
            start = time.perf_counter_ns()
            for _ in range(k_loop):
                system_fn(sentence)
            elapsed = (time.perf_counter_ns() - start) / k_loop / 1e6
            rep_samples.append(elapsed)
        samples_ms.extend(rep_samples)
        rep_means.append(float(np.mean(rep_samples)))

    arr = np.array(samples_ms)
    return LatencyReport(
        mean_ms=float(arr.mean()),
        p50_ms=float(np.percentile(arr, 50)),
        p95_ms=float(np.percentile(arr, 95)),
        p99_ms=float(np.percentile(arr, 99)),
        stddev_ms=float(arr.std()),
        min_ms=float(arr.min()),
        max_ms=float(arr.max()),
        per_repetition_means_ms=rep_means,
        n_sentences=len(timed),
        repetitions=repetitions,
        warmup_n=warmup_n,
        k_loop=k_loop,
        env={
            "cpu_count": os.cpu_count(),
            "platform": platform.platform(),
            "python": platform.python_version(),
            "implementation": platform.python_implementation(),
        },
        samples_ms=samples_ms,
    )


def write_report(path, report: LatencyReport, include_samples: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report.to_json(include_samples=include_samples), f, indent=2, sort_keys=True)
        f.write("\n")


def write_samples_csv(path, report: LatencyReport) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("call_index,duration_ms\n")
        for i, sample in enumerate(report.samples_ms or []):
            f.write(f"{i},{sample:.6f}\n")
