"""Symbol-level OFDM Monte-Carlo used to cross-check the analytic FSR model.

The chain is deliberately small: Gray-mapped uncoded modulation, per-subcarrier
channel, circularly-symmetric complex AWGN, genie-CSI equalization (MRC for one
stream, ZF for two), hard demodulation, exact bit-error count. No FEC is
simulated; the analytic ladder absorbs coding gain, so comparisons against it
go through an affine SNR calibration derived from the closed-form uncoded BER
(see `oracle_waterfall` / `oracle_snr_for`).

`snr_db` is the mean per-chain, per-subcarrier received SNR: noise power is
scaled to the average received signal power, so a unit 1x1 channel at 10 dB
gives the textbook BPSK bit-error rate Q(sqrt(2 * 10)).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc, expit

from .channel import ChannelMatrix
from .errors import UnderdeterminedError
from .phy import FSR_SLOPE_DB, FrameSpec, McsEntry, MODULATION_BITS


def _axis_tables(bits_per_axis: int):
    """(gray-code -> amplitude level, axis index -> gray-code) lookup tables."""
    n = 1 << bits_per_axis
    idx = np.arange(n)
    gray = idx ^ (idx >> 1)
    level_of_gray = np.empty(n, dtype=np.int64)
    level_of_gray[gray] = 2 * idx - (n - 1)
    return level_of_gray, gray


_AXIS_LEVEL_OF_GRAY = {b: _axis_tables(b)[0] for b in (1, 2, 3)}
_AXIS_GRAY_OF_INDEX = {b: _axis_tables(b)[1] for b in (1, 2, 3)}

# Normalization for unit average symbol energy: sqrt(mean level^2 per axis * axes).
_MOD_NORM = {"BPSK": 1.0, "QPSK": math.sqrt(2.0), "16QAM": math.sqrt(10.0),
             "64QAM": math.sqrt(42.0)}


def _bits_to_axis_ints(bits: np.ndarray, bits_per_axis: int) -> np.ndarray:
    groups = bits.reshape(-1, bits_per_axis)
    weights = 1 << np.arange(bits_per_axis - 1, -1, -1)
    return groups @ weights


def _axis_ints_to_bits(ints: np.ndarray, bits_per_axis: int) -> np.ndarray:
    shifts = np.arange(bits_per_axis - 1, -1, -1)
    return ((ints[:, None] >> shifts) & 1).reshape(-1)


def modulate(bits: np.ndarray, modulation: str) -> np.ndarray:
    """Gray-map a bit array onto unit-average-energy constellation symbols."""
    bps = MODULATION_BITS[modulation]
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size % bps:
        raise ValueError(f"bit count {bits.size} is not a multiple of {bps}")
    if modulation == "BPSK":
        return (2.0 * bits - 1.0).astype(complex)
    axis_bits = bps // 2
    lut = _AXIS_LEVEL_OF_GRAY[axis_bits]
    pairs = bits.reshape(-1, bps)
    i_ints = _bits_to_axis_ints(pairs[:, :axis_bits].reshape(-1), axis_bits)
    q_ints = _bits_to_axis_ints(pairs[:, axis_bits:].reshape(-1), axis_bits)
    return (lut[i_ints] + 1j * lut[q_ints]) / _MOD_NORM[modulation]


def _demod_axis(values: np.ndarray, bits_per_axis: int) -> np.ndarray:
    n = 1 << bits_per_axis
    idx = np.clip(np.round((values + (n - 1)) / 2.0), 0, n - 1).astype(np.int64)
    return _axis_ints_to_bits(_AXIS_GRAY_OF_INDEX[bits_per_axis][idx], bits_per_axis)


def demodulate(symbols: np.ndarray, modulation: str) -> np.ndarray:
    """Hard-decision demodulation back to bits (inverse of `modulate`)."""
    symbols = np.asarray(symbols).reshape(-1)
    if modulation == "BPSK":
        return (symbols.real > 0).astype(np.int64)
    bps = MODULATION_BITS[modulation]
    axis_bits = bps // 2
    scaled = symbols * _MOD_NORM[modulation]
    i_bits = _demod_axis(scaled.real, axis_bits).reshape(-1, axis_bits)
    q_bits = _demod_axis(scaled.imag, axis_bits).reshape(-1, axis_bits)
    return np.concatenate([i_bits, q_bits], axis=1).reshape(-1)


@dataclass(frozen=True, eq=False)
class OfdmGrid:
    """Modulated symbols per (stream, subcarrier, time); 52 or 108 subcarriers."""

    n_subcarriers: int
    symbols: np.ndarray

    def __post_init__(self):
        if self.n_subcarriers not in (52, 108):
            raise ValueError(f"n_subcarriers must be 52 or 108, got {self.n_subcarriers}")
        if self.symbols.ndim != 3 or self.symbols.shape[1] != self.n_subcarriers:
            raise ValueError("symbols must have shape (n_streams, n_subcarriers, n_symbols)")


def modulate_payload(bits: np.ndarray, mcs: McsEntry, n_subcarriers: int) -> OfdmGrid:
    """Spread payload bits over streams/subcarriers/time, zero-padding the tail."""
    bps = MODULATION_BITS[mcs.modulation]
    per_sym = bps * mcs.n_streams * n_subcarriers
    n_ofdm = max(1, math.ceil(bits.size / per_sym))
    padded = np.zeros(n_ofdm * per_sym, dtype=np.int64)
    padded[:bits.size] = bits
    syms = modulate(padded, mcs.modulation)
    grid = syms.reshape(n_ofdm, mcs.n_streams, n_subcarriers).transpose(1, 2, 0)
    return OfdmGrid(n_subcarriers=n_subcarriers, symbols=grid)


def _effective_channel(cm: ChannelMatrix, n_streams: int) -> np.ndarray:
    """Per-stream channel seen by each chain, shape (K, n_rx, n_streams).

    A single stream is radiated by every transmit element (their fields
    superpose coherently at each photodiode); with two streams the mapping is
    direct, one element per stream.
    """
    if n_streams == 1:
        return cm.entries.sum(axis=2, keepdims=True)
    return cm.entries[:, :, :n_streams]


def simulate_frame(cm: ChannelMatrix, mcs: McsEntry, frame: FrameSpec,
                   snr_db: float, seed: int,
                   combining: str = "mrc") -> tuple[int, bool]:
    """Simulate one frame end to end; returns (bit_errors, frame_ok).

    Deterministic for a fixed seed. `combining` picks the single-stream
    equalizer ("mrc" or "sc"); two streams always use ZF.
    """
    n_streams = mcs.n_streams
    if cm.n_rx < n_streams:
        raise UnderdeterminedError(
            f"{cm.n_rx} receive chain(s) cannot carry {n_streams} streams")
    if n_streams > cm.n_tx:
        raise ValueError(f"{cm.n_tx} transmit element(s) cannot carry {n_streams} streams")
    if combining not in ("mrc", "sc"):
        raise ValueError(f"combining must be 'mrc' or 'sc', got '{combining}'")

    rng = np.random.default_rng(seed)
    n_bits = frame.payload_bytes * 8
    bits = rng.integers(0, 2, size=n_bits)
    grid = modulate_payload(bits, mcs, cm.n_subcarriers)
    x = grid.symbols  # (n_streams, K, T)
    n_ofdm = x.shape[2]

    h = _effective_channel(cm, n_streams)  # (K, n_rx, n_streams)
    # Mean per-chain received signal power for unit-energy streams; the noise
    # level is referenced to it so snr_db is the average receive SNR.
    p_ref = float(np.mean(np.sum(np.abs(h) ** 2, axis=2)))
    n0 = p_ref * 10.0 ** (-snr_db / 10.0)
    noise = math.sqrt(n0 / 2.0) * (
        rng.standard_normal((cm.n_rx, cm.n_subcarriers, n_ofdm))
        + 1j * rng.standard_normal((cm.n_rx, cm.n_subcarriers, n_ofdm)))
    # y[i, k, t] = sum_s h[k, i, s] x[s, k, t] + noise
    y = np.einsum("kis,skt->ikt", h, x) + noise

    if n_streams == 1:
        hk = h[:, :, 0].T  # (n_rx, K)
        if combining == "sc":
            best = int(np.argmax(np.sum(np.abs(hk) ** 2, axis=1)))
            denom = hk[best]
            denom = np.where(np.abs(denom) > 0, denom, 1.0)
            x_hat = (y[best] / denom[:, None])[None, :, :]
        else:
            weights = hk.conj()
            denom = np.sum(np.abs(hk) ** 2, axis=0)
            denom = np.where(denom > 0, denom, 1.0)
            x_hat = (np.sum(weights[:, :, None] * y, axis=0) / denom[:, None])[None, :, :]
    else:
        w = np.linalg.pinv(h)  # (K, n_streams, n_rx)
        x_hat = np.einsum("ksi,ikt->skt", w, y)

    rx_bits = demodulate(x_hat.transpose(2, 0, 1).reshape(-1), mcs.modulation)
    bit_errors = int(np.count_nonzero(rx_bits[:n_bits] != bits))
    return bit_errors, bit_errors == 0


def empirical_fsr(cm: ChannelMatrix, mcs: McsEntry, frame: FrameSpec,
                  snr_db: float, n_frames: int, seed: int,
                  combining: str = "mrc") -> float:
    """Fraction of error-free frames over per-frame seeds seed, seed+1, ..."""
    if n_frames < 1:
        raise ValueError(f"n_frames must be >= 1, got {n_frames}")
    ok = 0
    for i in range(n_frames):
        _, frame_ok = simulate_frame(cm, mcs, frame, snr_db, seed + i, combining=combining)
        ok += frame_ok
    return ok / n_frames


def q_function(x) -> np.ndarray:
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def uncoded_bit_error_rate(modulation: str, snr_db) -> np.ndarray:
    """Closed-form Gray-mapped hard-decision BER at symbol SNR `snr_db`."""
    g = 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
    if modulation == "BPSK":
        return q_function(np.sqrt(2.0 * g))
    if modulation == "QPSK":
        return q_function(np.sqrt(g))
    if modulation == "16QAM":
        return 0.75 * q_function(np.sqrt(g / 5.0))
    if modulation == "64QAM":
        return (7.0 / 12.0) * q_function(np.sqrt(g / 21.0))
    raise ValueError(f"unknown modulation '{modulation}'")


def uncoded_frame_success(modulation: str, snr_db, n_bits: int) -> np.ndarray:
    """Closed-form FSR of an uncoded frame: every bit must survive."""
    return (1.0 - uncoded_bit_error_rate(modulation, snr_db)) ** n_bits


def oracle_waterfall(modulation: str, n_bits: int) -> tuple[float, float]:
    """Affine fit (midpoint dB, slope dB) of the uncoded waterfall.

    Solved from the closed-form FSR at the sigmoid(-1)/sigmoid(+1) quantiles,
    which is the one-time calibration that aligns oracle runs with the
    analytic ladder.
    """
    lo_q, hi_q = float(expit(-1.0)), float(expit(1.0))

    def solve(target):
        return brentq(lambda s: float(uncoded_frame_success(modulation, s, n_bits)) - target,
                      -20.0, 80.0, xtol=1e-9)

    lo, hi = solve(lo_q), solve(hi_q)
    return (lo + hi) / 2.0, (hi - lo) / 2.0


def oracle_snr_for(mcs: McsEntry, analytic_snr_db: float, frame: FrameSpec) -> float:
    """Map an SNR on the analytic ladder onto the uncoded oracle's SNR axis.

    The mapping is affine around the waterfall midpoints so that equal FSR
    quantiles line up: threshold maps to the oracle midpoint, one analytic
    slope unit maps to one oracle slope unit.
    """
    mid, slope = oracle_waterfall(mcs.modulation, frame.payload_bytes * 8)
    return mid + slope * (analytic_snr_db - mcs.snr_threshold_db) / FSR_SLOPE_DB
