"""Desk-scale cost measurements and rendered reports.

Measures this machine's vanity attempt rate and the latency of plain
recoverable-ECDSA verification versus identity-bound verification (first
contact and cached), then writes a delimited summary plus matplotlib
figures. The interesting structural fact the figures show: first-contact
identity verification costs two recoveries, every later one costs one.
"""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import vanity
from .ecdsa_recovery import keygen, sign, verify
from .ibs import Identity, ibs_keyder, ibs_setup
from .txsim import CertCache, Transaction, count_ops, sign_tx, verify_tx


@dataclass(frozen=True)
class BenchResults:
    vanity_rate: float
    ecdsa_verify_ms: float
    ibs_first_ms: float
    ibs_cached_ms: float

    @property
    def first_ratio(self) -> float:
        return self.ibs_first_ms / self.ecdsa_verify_ms

    @property
    def cached_ratio(self) -> float:
        return self.ibs_cached_ms / self.ecdsa_verify_ms

    def to_json_obj(self) -> dict:
        miss, hit = count_ops("miss"), count_ops("hit")
        return {
            "vanity_rate_per_s": self.vanity_rate,
            "ecdsa_verify_ms": self.ecdsa_verify_ms,
            "ibs_first_ms": self.ibs_first_ms,
            "ibs_cached_ms": self.ibs_cached_ms,
            "first_ratio": self.first_ratio,
            "cached_ratio": self.cached_ratio,
            "recoveries_first": miss.recoveries,
            "recoveries_cached": hit.recoveries,
        }


def _median(values: list) -> float:
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return float(ordered[mid])
    return (ordered[mid - 1] + ordered[mid]) / 2


def run_bench(
    rate_seconds: float = 1.0,
    verify_iterations: int = 25,
    entropy: Optional[bytes] = None,
) -> BenchResults:
    entropy = os.urandom(32) if entropy is None else entropy
    rate = vanity.measure_rate(rate_seconds)

    key = keygen(entropy)
    message = b"bench payload"
    sig = sign(key, message)

    master = ibs_setup(entropy[::-1])
    identity = Identity.from_text("bench")
    ibs_key = ibs_keyder(master, identity, entropy + b"u")
    tx = Transaction(nonce=1, to=bytes(20), value=5, data=b"x")
    tx_sig = sign_tx(ibs_key, tx)

    ecdsa_times = []
    for _ in range(verify_iterations):
        t0 = time.perf_counter()
        assert verify(key.address, sig, message)
        ecdsa_times.append(time.perf_counter() - t0)

    first_times = []
    for _ in range(verify_iterations):
        cache = CertCache()  # cold every round: first-contact cost
        t0 = time.perf_counter()
        verdict = verify_tx(master.address, identity, tx_sig, tx, cache)
        first_times.append(time.perf_counter() - t0)
        assert verdict.accepted and verdict.cert_checked

    warm = CertCache()
    verify_tx(master.address, identity, tx_sig, tx, warm)
    cached_times = []
    for _ in range(verify_iterations):
        t0 = time.perf_counter()
        verdict = verify_tx(master.address, identity, tx_sig, tx, warm)
        cached_times.append(time.perf_counter() - t0)
        assert verdict.accepted and not verdict.cert_checked

    return BenchResults(
        vanity_rate=rate,
        ecdsa_verify_ms=_median(ecdsa_times) * 1e3,
        ibs_first_ms=_median(first_times) * 1e3,
        ibs_cached_ms=_median(cached_times) * 1e3,
    )


# ---------------------------------------------------------------------------
# Rendering. Figures land next to the CSV in the chosen directory.


def _matplotlib():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def write_csv(results: BenchResults, path: Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["metric", "value"])
        for key, value in results.to_json_obj().items():
            writer.writerow([key, value])


def _verification_figure(plt, results: BenchResults, path: Path) -> None:
    labels = ["plain ECDSA", "identity-bound\n(first contact)", "identity-bound\n(cached cert)"]
    values = [results.ecdsa_verify_ms, results.ibs_first_ms, results.ibs_cached_ms]
    recoveries = [1, count_ops("miss").recoveries, count_ops("hit").recoveries]
    fig, ax = plt.subplots(figsize=(6, 4))
    bars = ax.bar(labels, values, color=["#4878d0", "#d65f5f", "#6acc64"])
    for bar, rec in zip(bars, recoveries):
        ax.annotate(
            f"{rec} recover{'y' if rec == 1 else 'ies'}",
            (bar.get_x() + bar.get_width() / 2, bar.get_height()),
            ha="center", va="bottom", fontsize=9,
        )
    ax.set_ylabel("median verification latency (ms)")
    ax.set_title(
        f"certificate amortization: {results.first_ratio:.2f}x first, "
        f"{results.cached_ratio:.2f}x cached"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _scaling_figure(plt, rate: float, path: Path) -> None:
    lengths = list(range(1, 11))
    t50 = [
        vanity.estimate(vanity.Pattern("a" * k, "prefix"), rate).t50_seconds
        for k in lengths
    ]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(lengths, t50, marker="o")
    for guide, label in ((60, "minute"), (3600, "hour"), (86400, "day"), (86400 * 365, "year")):
        ax.axhline(guide, color="grey", linewidth=0.6, linestyle=":")
        ax.annotate(label, (lengths[-1], guide), fontsize=8, color="grey",
                    ha="right", va="bottom")
    ax.set_xlabel("embedded hex characters (prefix)")
    ax.set_ylabel("time to 50% success (s)")
    ax.set_title(f"vanity search cost at {rate:,.0f} attempts/s on this machine")
    ax.set_xticks(lengths)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _attempts_figure(plt, attempts: list, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    upper = max(attempts)
    ax.hist(
        attempts,
        bins=range(1, upper + 2),
        density=True,
        alpha=0.6,
        label=f"observed ({len(attempts)} searches)",
    )
    xs = list(range(1, upper + 1))
    p = 1 / 16
    ax.plot(
        xs,
        [p * (1 - p) ** (x - 1) for x in xs],
        color="black",
        label="geometric, p = 1/16",
    )
    mean = sum(attempts) / len(attempts)
    ax.axvline(mean, color="red", linestyle="--", label=f"sample mean {mean:.1f}")
    ax.set_xlabel("attempts until a 1-char prefix match")
    ax.set_ylabel("probability")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report(
    results: BenchResults,
    out_dir: Path,
    attempts_sample: Optional[list] = None,
) -> list[Path]:
    """Write bench.csv plus the figures; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    plt = _matplotlib()
    written = []

    csv_path = out_dir / "bench.csv"
    write_csv(results, csv_path)
    written.append(csv_path)

    fig_path = out_dir / "verification_cost.png"
    _verification_figure(plt, results, fig_path)
    written.append(fig_path)

    fig_path = out_dir / "vanity_scaling.png"
    _scaling_figure(plt, results.vanity_rate, fig_path)
    written.append(fig_path)

    if attempts_sample:
        fig_path = out_dir / "vanity_attempts.png"
        _attempts_figure(plt, attempts_sample, fig_path)
        written.append(fig_path)
    return written


def sample_attempts(trials: int = 200, entropy: Optional[bytes] = None) -> list:
    """Attempt counts for 1-char prefix searches, for the histogram."""
    base = os.urandom(32) if entropy is None else entropy
    counts = []
    for i in range(trials):
        seed = base + i.to_bytes(4, "big")
        result = vanity.search(
            vanity.Pattern("a", "prefix"), entropy=seed, max_attempts=100_000
        )
        counts.append(result.attempts)
    return counts
