"""6D-voxelized reachability database: build, persist, query.

The database maps discretized end-effector poses to the joint configurations
that produce them.  A pose (x, y, z, roll, pitch, yaw) lands in the voxel
with integer key floor(value_d / grid_d) per dimension; inverse kinematics is
then approximated by returning every stored configuration in the voxel (or
in the voxels overlapping a small interval) around a target pose.

File format (little endian):
  magic "RPDB" | version u32 | chain fingerprint 32 bytes |
  six f64 grid lengths | voxel count u64 | record count u64 | njoints u32 |
  voxel directory: per voxel six i32 key, u64 record offset, u32 record count |
  records: six f64 pose, njoints f64 angles, f64 manipulability.
Record offsets index into the packed record array, not into the file.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose6, wrap_angle
from .kinematics import KinematicChain, forward_kinematics, manipulability

MAGIC = b"RPDB"
FORMAT_VERSION = 1
TWO_PI = 2.0 * math.pi

# Quotients within this distance of an integer snap up, so that values like
# 0.6 / 0.05 (= 11.999999999999998 in floats) index the cell they denote.
_INDEX_SNAP = 1e-9

_HEADER = struct.Struct("<4sI32s6dQQI")
_DIR_ENTRY = struct.Struct("<6iQI")


class DatabaseError(Exception):
    """Base class for reachability-database errors."""


class MagicMismatchError(DatabaseError):
    pass


class VersionMismatchError(DatabaseError):
    pass


class TruncatedDatabaseError(DatabaseError):
    def __init__(self, message: str, record_index: int | None = None):
        super().__init__(message)
        self.record_index = record_index


class FingerprintMismatchError(DatabaseError):
    pass


class CorruptDatabaseError(DatabaseError):
    pass


class EmptyDatabaseError(DatabaseError):
    pass


@dataclass(frozen=True)
class VoxelSpec:
    """Grid lengths of the six pose dimensions (m and rad)."""

    dx: float
    dy: float
    dz: float
    droll: float
    dpitch: float
    dyaw: float

    def __post_init__(self):
        for name, v in zip(("dx", "dy", "dz", "droll", "dpitch", "dyaw"),
                           self.as_array()):
            if not v > 0.0:
                raise ValueError(f"voxel grid length {name} must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dz,
                         self.droll, self.dpitch, self.dyaw])

    @property
    def wrap_aligned(self) -> bool:
        """True when the angular grids tile their domains exactly.

        droll and dyaw should divide 2*pi and dpitch should divide pi so the
        wrap-around seam falls on a voxel boundary; unaligned grids still
        work, with partially-covered seam cells.
        """
        for span, step in ((TWO_PI, self.droll), (math.pi, self.dpitch),
                           (TWO_PI, self.dyaw)):
            ratio = span / step
            if abs(ratio - round(ratio)) > 1e-12:
                return False
        return True


@dataclass(frozen=True)
class SamplingSpec:
    """Joint-space grid step plus the manipulability acceptance rule.

    Exactly one of ``dtheta`` (scalar or per-joint step, rad) and ``counts``
    (per-joint sample counts) must be given.  Configurations with
    manipulability below ``w_min`` are dropped; with ``thin_exponent`` > 0
    the survivors are additionally thinned with acceptance probability
    min(1, (w / thin_ref) ** thin_exponent) under a generator seeded with
    ``seed``.
    """

    dtheta: float | tuple[float, ...] | None = None
    counts: tuple[int, ...] | None = None
    w_min: float = 0.0
    thin_exponent: float = 0.0
    thin_ref: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if (self.dtheta is None) == (self.counts is None):
            raise ValueError("give exactly one of dtheta and counts")
        if self.w_min < 0.0:
            raise ValueError("w_min must be non-negative")
        if self.thin_exponent < 0.0:
            raise ValueError("thin exponent must be non-negative")
        if self.dtheta is not None and not isinstance(self.dtheta, (int, float)):
            object.__setattr__(self, "dtheta", tuple(float(v) for v in self.dtheta))
        if self.counts is not None:
            object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    def joint_samples(self, chain: KinematicChain) -> list[np.ndarray]:
        """Per-joint sample values: lo + k*step on the half-open limit range."""
        out = []
        for i, joint in enumerate(chain.joints):
            span = joint.limit_hi - joint.limit_lo
            if self.counts is not None:
                if len(self.counts) != chain.njoints:
                    raise ValueError("counts length must match joint count")
                n = self.counts[i]
                if n < 1:
                    raise ValueError("sample counts must be >= 1")
                step = span / n
            else:
                step = (self.dtheta if isinstance(self.dtheta, float)
                        else self.dtheta[i])
                if not step > 0.0:
                    raise ValueError("dtheta must be positive")
                n = int(math.floor(span / step - 1e-9)) + 1
            out.append(joint.limit_lo + step * np.arange(n))
        return out

    def sample_count(self, chain: KinematicChain) -> int:
        """Total number of joint-space samples a build would evaluate."""
        total = 1
        for values in self.joint_samples(chain):
            total *= len(values)
        return total


def _snap_floor(quotient: float) -> int:
    return int(math.floor(quotient + _INDEX_SNAP))


def voxel_index(pose: Pose6, spec: VoxelSpec) -> tuple[int, int, int, int, int, int]:
    """Voxel key of a canonicalized pose: floor(value / grid) per dimension.

    roll and yaw are wrapped to [-pi, pi) before flooring; cells are
    half-open [k*grid, (k+1)*grid).
    """
    return (
        _snap_floor(pose.x / spec.dx),
        _snap_floor(pose.y / spec.dy),
        _snap_floor(pose.z / spec.dz),
        _snap_floor(wrap_angle(pose.roll) / spec.droll),
        _snap_floor(pose.pitch / spec.dpitch),
        _snap_floor(wrap_angle(pose.yaw) / spec.dyaw),
    )


# Free-axis masks: entry True means the pose dimension is unconstrained in a
# query (any voxel index matches on that dimension).
FULLY_CONSTRAINED = (False,) * 6
POSITION_ONLY = (False, False, False, True, True, True)


@dataclass
class ReachDB:
    """Immutable voxel-indexed map from poses to joint configurations."""

    voxel_spec: VoxelSpec
    fingerprint: bytes
    njoints: int
    keys: np.ndarray      # (V, 6) int32, lexicographically sorted
    offsets: np.ndarray   # (V,) record row of each voxel's first record
    counts: np.ndarray    # (V,)
    poses: np.ndarray     # (R, 6) float64
    configs: np.ndarray   # (R, n) float64
    manip: np.ndarray     # (R,) float64
    _key_rows: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._key_rows:
            self._key_rows = {tuple(int(v) for v in k): i
                              for i, k in enumerate(self.keys)}

    @property
    def voxel_count(self) -> int:
        return int(self.keys.shape[0])

    @property
    def record_count(self) -> int:
        return int(self.poses.shape[0])

    def check_chain(self, chain: KinematicChain):
        if chain.fingerprint() != self.fingerprint:
            raise FingerprintMismatchError(
                "database was built for a different kinematic chain")

    def voxel_rows(self, key) -> np.ndarray:
        """Record row indices stored under one voxel key (insertion order)."""
        row = self._key_rows.get(tuple(int(v) for v in key))
        if row is None:
            return np.empty(0, dtype=np.int64)
        start = int(self.offsets[row])
        return np.arange(start, start + int(self.counts[row]), dtype=np.int64)

    def record(self, row: int) -> tuple[Pose6, np.ndarray, float]:
        return (Pose6.from_array(self.poses[row]), self.configs[row].copy(),
                float(self.manip[row]))


def build(chain: KinematicChain, sampling: SamplingSpec, spec: VoxelSpec) -> ReachDB:
    """Sample the joint-space grid, run FK, and voxelize the survivors.

    Samples are visited in ascending lexicographic joint-grid order, which
    fixes the stored record order; identical inputs give identical databases.
    Raises EmptyDatabaseError when every sample is rejected.
    """
    axes = sampling.joint_samples(chain)
    shape = tuple(len(a) for a in axes)
    total = int(np.prod([len(a) for a in axes], dtype=np.int64))
    if total == 0:
        raise EmptyDatabaseError("joint-space grid is empty")

    rng = np.random.default_rng(sampling.seed)
    thin = sampling.thin_exponent > 0.0

    kept_keys = []
    kept_poses = []
    kept_configs = []
    kept_manip = []
    config = np.zeros(chain.njoints)
    for flat in range(total):
        rem = flat
        for axis in range(chain.njoints - 1, -1, -1):
            rem, idx = divmod(rem, shape[axis])
            config[axis] = axes[axis][idx]
        w = manipulability(chain, config)
        if w < sampling.w_min:
            continue
        if thin:
            accept = min(1.0, (w / sampling.thin_ref) ** sampling.thin_exponent)
            if rng.random() >= accept:
                continue
        pose = forward_kinematics(chain, config)
        kept_keys.append(voxel_index(pose, spec))
        kept_poses.append(pose.as_array())
        kept_configs.append(config.copy())
        kept_manip.append(w)

    if not kept_poses:
        raise EmptyDatabaseError("all joint-space samples were rejected")

    keys_arr = np.array(kept_keys, dtype=np.int32)
    poses_arr = np.array(kept_poses)
    configs_arr = np.array(kept_configs)
    manip_arr = np.array(kept_manip)

    # group records by voxel: stable sort keeps joint-grid order per voxel
    order = np.lexsort(keys_arr.T[::-1])
    keys_sorted = keys_arr[order]
    uniq, first, counts = np.unique(
        keys_sorted, axis=0, return_index=True, return_counts=True)
    # np.unique sorts rows lexicographically already
    db = ReachDB(
        voxel_spec=spec,
        fingerprint=chain.fingerprint(),
        njoints=chain.njoints,
        keys=uniq.astype(np.int32),
        offsets=first.astype(np.uint64),
        counts=counts.astype(np.uint32),
        poses=poses_arr[order],
        configs=configs_arr[order],
        manip=manip_arr[order],
    )
    _check_indexing(db)
    return db


def pose_keys(poses: np.ndarray, spec: VoxelSpec) -> np.ndarray:
    """Vectorized voxel_index over an (N, 6) pose array."""
    vals = np.asarray(poses, dtype=float).copy()
    for d in (3, 5):
        r = np.fmod(vals[:, d] + math.pi, TWO_PI)
        r[r < 0.0] += TWO_PI
        vals[:, d] = r - math.pi
    quotients = vals / spec.as_array()[None, :]
    return np.floor(quotients + _INDEX_SNAP).astype(np.int32)


def _check_indexing(db: ReachDB):
    """Assert every stored pose re-indexes to the key it is stored under."""
    if db.record_count == 0:
        return
    keys = pose_keys(db.poses, db.voxel_spec)
    expected = np.repeat(db.keys, db.counts.astype(np.int64), axis=0)
    bad = np.nonzero((keys != expected).any(axis=1))[0]
    if bad.size:
        raise CorruptDatabaseError(
            f"record {int(bad[0])} does not re-index to its storage key")


def query(db: ReachDB, target: Pose6, free=None) -> list[tuple[Pose6, np.ndarray, float]]:
    """All records in the voxel containing the target pose.

    Dimensions flagged True in ``free`` match any voxel index.  An empty
    list means the pose is unreachable at this database resolution.
    """
    rows = query_rows(db, target, free=free, interval=False)
    return [db.record(r) for r in rows]


def query_interval(db: ReachDB, target: Pose6, free=None) -> list[tuple[Pose6, np.ndarray, float]]:
    """Records from every voxel overlapping the half-grid interval at target.

    Per constrained dimension the open interval (v - grid/2, v + grid/2)
    overlaps at most two voxels (roll/yaw wrap at +-pi); the union of their
    records is returned, a superset of query(db, target).
    """
    rows = query_rows(db, target, free=free, interval=True)
    return [db.record(r) for r in rows]


def _axis_candidates(value: float, step: float, wrap: bool) -> list[int]:
    if wrap:
        value = wrap_angle(value)
    base = _snap_floor(value / step)
    cands = [base]
    offset = value - base * step
    if offset < step / 2.0:
        probe = value - step / 2.0
        cands.append(_snap_floor((wrap_angle(probe) if wrap else probe) / step))
    elif offset > step / 2.0:
        probe = value + step / 2.0
        cands.append(_snap_floor((wrap_angle(probe) if wrap else probe) / step))
    return sorted(set(cands))


def query_rows(db: ReachDB, target: Pose6, free=None, interval: bool = True) -> np.ndarray:
    """Record rows matched by a query, in deterministic storage order."""
    free_mask = FULLY_CONSTRAINED if free is None else tuple(bool(v) for v in free)
    if len(free_mask) != 6:
        raise ValueError("free mask must have six entries")
    target = target.canonicalized()
    values = target.as_array()
    steps = db.voxel_spec.as_array()
    wraps = (False, False, False, True, False, True)

    if not any(free_mask) and not interval:
        return db.voxel_rows(voxel_index(target, db.voxel_spec))

    ok = np.ones(db.voxel_count, dtype=bool)
    for d in range(6):
        if free_mask[d]:
            continue
        if interval:
            cands = _axis_candidates(float(values[d]), float(steps[d]), wraps[d])
        else:
            v = wrap_angle(float(values[d])) if wraps[d] else float(values[d])
            cands = [_snap_floor(v / float(steps[d]))]
        col = db.keys[:, d]
        ok &= np.isin(col, np.array(cands, dtype=np.int32))
    rows = []
    for vrow in np.nonzero(ok)[0]:
        start = int(db.offsets[vrow])
        rows.append(np.arange(start, start + int(db.counts[vrow]), dtype=np.int64))
    if not rows:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(rows)


def reachability_projection(db: ReachDB) -> dict[tuple[int, int, int], int]:
    """Collapse the 6D voxels over orientation: 3D position-cell counts."""
    if db.record_count == 0:
        raise EmptyDatabaseError("cannot project an empty database")
    out: dict[tuple[int, int, int], int] = {}
    for vrow in range(db.voxel_count):
        key3 = tuple(int(v) for v in db.keys[vrow, :3])
        out[key3] = out.get(key3, 0) + int(db.counts[vrow])
    return out


def save(db: ReachDB, path):
    """Write the database; identical databases produce identical bytes."""
    with open(path, "wb") as fh:
        grid = db.voxel_spec.as_array()
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, db.fingerprint, *grid,
                              db.voxel_count, db.record_count, db.njoints))
        for vrow in range(db.voxel_count):
            fh.write(_DIR_ENTRY.pack(*(int(v) for v in db.keys[vrow]),
                                     int(db.offsets[vrow]), int(db.counts[vrow])))
        packed = np.hstack([db.poses, db.configs, db.manip[:, None]])
        fh.write(np.ascontiguousarray(packed, dtype="<f8").tobytes())


def load(path, expect_chain: KinematicChain | None = None) -> ReachDB:
    """Read a database; verifies layout, indexing, and (optionally) the chain."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[:4] != MAGIC:
        raise MagicMismatchError("not a reachability database (bad magic)")
    if len(data) < _HEADER.size:
        raise TruncatedDatabaseError("truncated header")
    (_, version, fingerprint, dx, dy, dz, dr, dp, dw,
     voxel_count, record_count, njoints) = _HEADER.unpack_from(data, 0)
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"format version {version} not supported (expected {FORMAT_VERSION})")
    spec = VoxelSpec(dx, dy, dz, dr, dp, dw)

    dir_start = _HEADER.size
    dir_size = _DIR_ENTRY.size * voxel_count
    if len(data) < dir_start + dir_size:
        raise TruncatedDatabaseError("truncated voxel directory")
    keys = np.zeros((voxel_count, 6), dtype=np.int32)
    offsets = np.zeros(voxel_count, dtype=np.uint64)
    counts = np.zeros(voxel_count, dtype=np.uint32)
    for i in range(voxel_count):
        entry = _DIR_ENTRY.unpack_from(data, dir_start + i * _DIR_ENTRY.size)
        keys[i] = entry[:6]
        offsets[i] = entry[6]
        counts[i] = entry[7]

    rec_start = dir_start + dir_size
    rec_width = 6 + njoints + 1
    rec_bytes = rec_width * 8
    available = len(data) - rec_start
    if available < record_count * rec_bytes:
        raise TruncatedDatabaseError(
            f"records truncated at record {available // rec_bytes}",
            record_index=available // rec_bytes)
    flat = np.frombuffer(data, dtype="<f8", count=record_count * rec_width,
                         offset=rec_start).reshape(record_count, rec_width)
    db = ReachDB(
        voxel_spec=spec,
        fingerprint=fingerprint,
        njoints=int(njoints),
        keys=keys,
        offsets=offsets,
        counts=counts,
        poses=flat[:, :6].copy(),
        configs=flat[:, 6:6 + njoints].copy(),
        manip=flat[:, 6 + njoints].copy(),
    )
    if int(counts.sum()) != record_count:
        raise CorruptDatabaseError("directory counts do not sum to record count")
    expected_offsets = np.zeros(voxel_count, dtype=np.uint64)
    if voxel_count:
        expected_offsets[1:] = np.cumsum(counts.astype(np.uint64))[:-1]
    if voxel_count and not np.array_equal(offsets, expected_offsets):
        raise CorruptDatabaseError("voxel directory offsets are not contiguous")
    _check_indexing(db)
    if expect_chain is not None:
        db.check_chain(expect_chain)
    return db
