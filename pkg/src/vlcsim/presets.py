"""Named reference scenes for the scripted experiments.

Every number here is a calibration artifact chosen by inverting the Lambertian
model so the scripted runs land on the documented operating points (equal-gain
SIMO branches, the -55 dBm SISO anchor, the 2x2 area layout, the near-singular
"both receivers in the overlap area" case). They are defaults, not physical
ground truth; override them via scene files where needed.

Geometry conventions: scenes live in the x-y plane (z only separates stacked
receivers), transmitters fire along +x or +y, and receivers stare back at the
transmitter plane.
"""

import math

import numpy as np
from scipy.optimize import brentq

from .channel import (DEFAULT_CENTER_FREQ_HZ, SPEED_OF_LIGHT_M_S, FrontEnd,
                      Obstacle, Scene, los_gain)
from .phy import mcs, snr_for_fsr

TX_SEMI_ANGLE_DEG = 30.0       # Lambertian order ~4.82
RX_FOV_DEG = 45.0
RX_AREA_M2 = 1e-4              # 1 cm^2 photodiode
RX_CONVERSION_GAIN_DB = 0.0

# Blockage timeline covers, half-open [start, end) frame intervals.
BLOCK_B_FRAMES = (100, 181)
BLOCK_A_FRAMES = (200, 281)

# Single-path FSR operating points for the MRC gain demonstration.
MRC_POINT_TARGET_FSR = (0.626, 0.365)


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def _tx(fe_id, position, boresight, power_dbm, semi_angle=TX_SEMI_ANGLE_DEG):
    return FrontEnd(id=fe_id, role="tx", position=np.asarray(position, float),
                    boresight=_unit(boresight), half_power_semi_angle=semi_angle,
                    tx_electrical_power_dbm=power_dbm)


def _rx(fe_id, position, boresight, fov=RX_FOV_DEG, area=RX_AREA_M2,
        conversion_gain_db=RX_CONVERSION_GAIN_DB):
    return FrontEnd(id=fe_id, role="rx", position=np.asarray(position, float),
                    boresight=_unit(boresight), fov_half_angle=fov,
                    active_area=area, conversion_gain_db=conversion_gain_db)


def siso_scene(distance_m: float = 2.0) -> Scene:
    """One TX and one RX facing each other on the x axis.

    At 0 dBm TX power the RSSI is about -40.3 - 20*log10(d) dBm, so sweeping
    d from 0.15 m to 12.5 m covers roughly -24 dBm down to the noise floor.
    """
    return Scene(front_ends=(
        _tx("tx_a", (0, 0, 0), (1, 0, 0), power_dbm=0.0),
        _rx("rx_a", (distance_m, 0, 0), (-1, 0, 0)),
    ))


def siso_sweep_distances(n_points: int = 64) -> np.ndarray:
    return np.geomspace(0.15, 12.5, n_points)


def simo_blockage_scene() -> Scene:
    """One TX, two symmetric RX (equal path gains), and the two timed covers."""
    tx_pos = np.array([0.0, 0.0, 0.0])
    rx_a_pos = np.array([2.0, 0.3, 0.0])
    rx_b_pos = np.array([2.0, -0.3, 0.0])
    return Scene(
        front_ends=(
            _tx("tx_a", tx_pos, (1, 0, 0), power_dbm=0.0),
            _rx("rx_a", rx_a_pos, tx_pos - rx_a_pos),
            _rx("rx_b", rx_b_pos, tx_pos - rx_b_pos),
        ),
        obstacles=(
            Obstacle(blocked_pairs=frozenset({("tx_a", "rx_b")}), active_frames=BLOCK_B_FRAMES),
            Obstacle(blocked_pairs=frozenset({("tx_a", "rx_a")}), active_frames=BLOCK_A_FRAMES),
        ))


def handover_scene(rx_azimuth_deg: float = 30.0, distance_m: float = 2.5) -> Scene:
    """One rotatable TX between two distributed RX at +-rx_azimuth_deg.

    The RX offset equals the TX half-power semi-angle, so at mid-sweep each
    branch sits exactly at half power and their MRC sum matches the boresight
    power: the combined level stays almost flat while each branch swings hard.
    """
    a = math.radians(rx_azimuth_deg)
    rx_a_pos = distance_m * np.array([math.cos(a), math.sin(a), 0.0])
    rx_b_pos = distance_m * np.array([math.cos(a), -math.sin(a), 0.0])
    return Scene(front_ends=(
        _tx("tx_a", (0, 0, 0), rx_a_pos, power_dbm=0.0),
        _rx("rx_a", rx_a_pos, -rx_a_pos),
        _rx("rx_b", rx_b_pos, -rx_b_pos),
    ))


def handover_angles(n_points: int = 61, rx_azimuth_deg: float = 30.0) -> np.ndarray:
    """TX boresight azimuths sweeping from RX A across to RX B."""
    return np.linspace(rx_azimuth_deg, -rx_azimuth_deg, n_points)


# 2x2 area layout: two TX a meter apart firing across a 2 m gap onto a
# receiver rail. The 30 degree RX FOV carves the rail into "A only" / "both" /
# "B only" regions; +-0.1 m z offsets keep paired receivers distinct. TX power
# is set so the near-singular "both in area 2" case lands just above the
# 2-stream BPSK threshold (ZF there burns roughly 28 dB of SNR).
_AREA_TX_POWER_DBM = 18.5
_AREA_TX_X = 0.5
_AREA_RAIL_Y = 2.0
_AREA_RX_FOV_DEG = 30.0
_AREA_RX_X = {1: -1.2, 2: 0.0, 3: 1.2}
_AREA_RX_Z = (0.1, -0.1)


def _area_tx(side: str) -> FrontEnd:
    x = -_AREA_TX_X if side == "a" else _AREA_TX_X
    return _tx(f"tx_{side}", (x, 0, 0), (0, 1, 0), power_dbm=_AREA_TX_POWER_DBM)


def _area_rx(fe_id: str, x: float, z: float) -> FrontEnd:
    return _rx(fe_id, (x, _AREA_RAIL_Y, z), (0, -1, 0), fov=_AREA_RX_FOV_DEG)


def _tilted_area_rx(fe_id: str, z: float, tilt_deg: float) -> FrontEnd:
    a = math.radians(tilt_deg)
    return _rx(fe_id, (_AREA_RX_X[2], _AREA_RAIL_Y, z),
               (math.sin(a), -math.cos(a), 0.0), fov=_AREA_RX_FOV_DEG)


def area2_tilt_for_imbalance(imbalance_db: float, z: float = _AREA_RX_Z[1]) -> float:
    """Boresight tilt (degrees toward TX B) skewing an area-2 RX's path gains.

    Tilting changes only the incidence-angle factors, not the path lengths,
    so the two path delays stay equal and the channel row keeps a common
    phase: the gain ratio moves by `imbalance_db` while the row stays almost
    proportional to an untilted area-2 row.
    """
    if imbalance_db == 0.0:
        return 0.0
    tx_a, tx_b = _area_tx("a"), _area_tx("b")

    def skew(tilt):
        probe = _tilted_area_rx("probe", z, tilt)
        ga, _ = los_gain(tx_a, probe)
        gb, _ = los_gain(tx_b, probe)
        return 10.0 * math.log10(ga / gb) + imbalance_db

    # Beyond ~15.5 degrees the TX A path leaves the receiver FOV entirely.
    max_tilt = 15.5
    if skew(max_tilt) > 0.0:
        raise ValueError(
            f"imbalance of {imbalance_db} dB is not reachable by tilting "
            "within the receiver FOV (max is about 0.59 dB)")
    return brentq(skew, 0.0, max_tilt, xtol=1e-12)


def mimo_area_scene(placement: tuple[int, int], imbalance_db: float = 0.0) -> Scene:
    """Two TX plus two RX dropped into the requested coverage areas.

    `placement` gives the area (1, 2, or 3) of each receiver. When both sit in
    area 2 their channel rows are exactly proportional; a nonzero
    `imbalance_db` tilts the second receiver toward TX B so its two path gains
    differ by that many dB, which is what keeps the matrix barely invertible.
    """
    if len(placement) != 2 or any(p not in (1, 2, 3) for p in placement):
        raise ValueError(f"placement must be a pair from areas 1..3, got {placement}")
    if imbalance_db and placement != (2, 2):
        raise ValueError("an area-2 gain imbalance only applies to the (2, 2) placement")
    rx = []
    for idx, (area, z) in enumerate(zip(placement, _AREA_RX_Z)):
        if idx == 1 and imbalance_db:
            rx.append(_tilted_area_rx(f"rx_{'ab'[idx]}", z,
                                      area2_tilt_for_imbalance(imbalance_db, z)))
        else:
            rx.append(_area_rx(f"rx_{'ab'[idx]}", _AREA_RX_X[area], z))
    return Scene(front_ends=(_area_tx("a"), _area_tx("b"), *rx))


def csi_siso_scene() -> Scene:
    """Flat single-path channel for the quantization-ripple baseline."""
    return siso_scene(distance_m=2.0)


def csi_miso_scene(center_freq_hz: float = DEFAULT_CENTER_FREQ_HZ) -> Scene:
    """Two co-aligned TX whose ~1 ns path-delay difference notches the band.

    The extra path length puts the second transmitter half a carrier cycle
    behind at the band center, and its TX power is raised to equalize the two
    received field amplitudes, so the superposed channel dips deeply mid-band.
    """
    d_near = 2.0
    cycles = round(center_freq_hz * 1e-9 - 0.5) + 0.5  # delta near 1 ns
    delta_tau = cycles / center_freq_hz
    d_far = d_near + SPEED_OF_LIGHT_M_S * delta_tau
    power_a = 0.0
    power_b = power_a + 20.0 * math.log10(d_far / d_near)  # match field amplitudes
    return Scene(front_ends=(
        _tx("tx_a", (0, 0, 0), (1, 0, 0), power_dbm=power_a),
        _tx("tx_b", (-(d_far - d_near), 0, 0), (1, 0, 0), power_dbm=power_b),
        _rx("rx_a", (d_near, 0, 0), (-1, 0, 0)),
    ))


def mrc_point_snrs_db() -> tuple[float, float]:
    """Per-path MCS0 SNRs that hit the two reference single-path FSRs."""
    entry = mcs(0)
    return tuple(snr_for_fsr(entry, t) for t in MRC_POINT_TARGET_FSR)


SCENE_PRESETS = {
    "siso": siso_scene,
    "simo-blockage": simo_blockage_scene,
    "handover": handover_scene,
    "csi-siso": csi_siso_scene,
    "csi-miso": csi_miso_scene,
}
