"""Training/test set assembly and the on-disk dataset formats.

A dataset directory holds ``manifest.json`` (labels, provenance, metadata)
and ``items.rmx``, a packed binary mirror of labels and spectra::

    b"RMX1" | u8 version | u32 n_items | u32 n_points | u32 label_len
    | f64 grid_start | f64 grid_end
    | n_items x (label_len x f32 label, n_points x f32 intensities)

All integers and floats are little-endian.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .augment import AugmentConfig, augment_spectrum, substream
from .errors import SpectrumFormatError
from .io_utils import atomic_write_bytes, read_json, write_json
from .spectrum import MixtureLabel, Spectrum, WavenumberGrid, normalize_minmax, read_spectrum_csv
from .synthgen import CompoundLibrary, MixtureGenConfig, enumerate_mixtures, standard_test_set

PACKED_MAGIC = b"RMX1"
PACKED_VERSION = 1
_PACKED_HEADER = struct.Struct("<4sBIIIdd")
MANIFEST_FORMAT = "ramix-dataset"
MANIFEST_VERSION = 1


@dataclass
class Dataset:
    """Spectra as rows of ``X`` with serialised labels ``[presence | ratios]`` in ``Y``."""

    X: np.ndarray
    Y: np.ndarray
    grid: WavenumberGrid
    names: tuple
    records: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.X.shape[0]

    @property
    def n_classes(self) -> int:
        return self.Y.shape[1] // 2

    @property
    def presence(self) -> np.ndarray:
        return self.Y[:, : self.n_classes]

    @property
    def ratios(self) -> np.ndarray:
        return self.Y[:, self.n_classes :]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        recs = [self.records[i] for i in idx] if self.records else []
        return Dataset(self.X[idx], self.Y[idx], self.grid, self.names, recs, dict(self.meta))


def build_dataset(
    lib: CompoundLibrary,
    mix_cfg: MixtureGenConfig,
    aug_cfg: AugmentConfig | None = None,
) -> Dataset:
    """Enumerate all mixtures and apply the augmentation policy.

    With ``aug_cfg`` None every mixture is emitted once, un-normalised. Otherwise
    each mixture yields one clean min-max normalised copy (if enabled) followed
    by ``repeats`` augmented copies; copy ``r`` of mixture ``j`` draws from
    substream ``j * repeats + r`` of ``aug_cfg.seed``.
    """
    xs, ys, records = [], [], []
    for j, (label, mix) in enumerate(enumerate_mixtures(lib, mix_cfg)):
        vec = label.to_vector()
        if aug_cfg is None:
            xs.append(mix.intensities)
            ys.append(vec)
            records.append({"mixture": j, "kind": "raw", "substream": None, "provenance": None})
            continue
        if aug_cfg.include_clean:
            xs.append(normalize_minmax(mix).intensities)
            ys.append(vec)
            records.append({"mixture": j, "kind": "clean", "substream": None, "provenance": None})
        for r in range(aug_cfg.repeats):
            sid = j * aug_cfg.repeats + r
            aug = augment_spectrum(mix, aug_cfg, substream(aug_cfg.seed, sid))
            xs.append(aug.spectrum.intensities)
            ys.append(vec)
            records.append({"mixture": j, "kind": "augmented", "substream": sid, "provenance": aug.provenance()})
    meta = {
        "levels": mix_cfg.levels,
        "include_full_scale": mix_cfg.include_full_scale,
        "augment": None if aug_cfg is None else augment_config_dict(aug_cfg),
        "seed": None if aug_cfg is None else aug_cfg.seed,
    }
    X = np.array(xs, dtype=np.float64).reshape(len(xs), lib.grid.n_points)
    Y = np.array(ys, dtype=np.float64).reshape(len(ys), 2 * lib.n_compounds)
    return Dataset(X, Y, lib.grid, lib.names, records, meta)


def build_test_set(lib: CompoundLibrary, seed: int = 0, aug_cfg: AugmentConfig | None = None) -> Dataset:
    """The six standard test mixtures as a :class:`Dataset`."""
    items = standard_test_set(lib, seed=seed, augment_cfg=aug_cfg)
    X = np.stack([s.intensities for _, _, s in items])
    Y = np.stack([label.to_vector() for _, label, _ in items])
    records = [{"name": name, "kind": "test", "substream": i, "provenance": None} for i, (name, _, _) in enumerate(items)]
    return Dataset(X, Y, lib.grid, lib.names, records, {"seed": seed, "test_set": "standard"})


def augment_config_dict(cfg: AugmentConfig) -> dict:
    return {
        "shift_range": list(cfg.shift_range),
        "scale_range": list(cfg.scale_range),
        "families": list(cfg.families),
        "polynomial_coeff_range": list(cfg.polynomial_coeff_range),
        "seed": cfg.seed,
        "repeats": cfg.repeats,
        "include_clean": cfg.include_clean,
        "renormalize_after_baseline": cfg.renormalize_after_baseline,
    }


# ---------------------------------------------------------------- packed binary


def pack_items(grid: WavenumberGrid, Y: np.ndarray, X: np.ndarray) -> bytes:
    n, label_len = Y.shape
    header = _PACKED_HEADER.pack(PACKED_MAGIC, PACKED_VERSION, n, grid.n_points, label_len, grid.start_cm1, grid.end_cm1)
    body = np.concatenate([Y, X], axis=1).astype("<f4")
    return header + body.tobytes()


def unpack_items(data: bytes, path=None):
    """Inverse of :func:`pack_items`: ``(grid, Y, X)`` as float64 arrays."""
    if len(data) < _PACKED_HEADER.size:
        raise SpectrumFormatError("packed dataset truncated before header end", path)
    magic, version, n, n_points, label_len, start, end = _PACKED_HEADER.unpack_from(data)
    if magic != PACKED_MAGIC:
        raise SpectrumFormatError(f"bad magic {magic!r}", path)
    if version != PACKED_VERSION:
        raise SpectrumFormatError(f"unsupported packed version {version}", path)
    width = label_len + n_points
    expected = _PACKED_HEADER.size + 4 * n * width
    if len(data) != expected:
        raise SpectrumFormatError(f"packed dataset has {len(data)} bytes, expected {expected}", path)
    body = np.frombuffer(data, dtype="<f4", offset=_PACKED_HEADER.size).reshape(n, width).astype(np.float64)
    return WavenumberGrid(start, end, n_points), body[:, :label_len], body[:, label_len:]


# ---------------------------------------------------------------- manifest


def write_dataset(directory, ds: Dataset, spectra_file: str = "items.rmx") -> str:
    """Write ``manifest.json`` plus the packed spectra; returns the manifest path."""
    os.makedirs(directory, exist_ok=True)
    atomic_write_bytes(os.path.join(directory, spectra_file), pack_items(ds.grid, ds.Y, ds.X))
    items = []
    for i, rec in enumerate(ds.records or [{} for _ in range(len(ds))]):
        item = {"index": i, "label": [float(v) for v in ds.Y[i]], "spectrum": {"file": spectra_file, "index": i}}
        item.update(rec)
        items.append(item)
    manifest = {
        "format": MANIFEST_FORMAT,
        "version": MANIFEST_VERSION,
        "compounds": list(ds.names),
        "grid": ds.grid.to_dict(),
        "n_items": len(ds),
        "spectra_file": spectra_file,
        **{k: v for k, v in ds.meta.items() if k not in ("compounds", "grid", "n_items")},
        "items": items,
    }
    path = os.path.join(directory, "manifest.json")
    write_json(path, manifest)
    return path


def read_dataset(manifest_path) -> Dataset:
    """Load a manifest; spectra come from the packed file, inline arrays or CSV paths."""
    try:
        m = read_json(manifest_path)
    except (OSError, ValueError) as exc:
        raise SpectrumFormatError(f"cannot read manifest: {exc}", manifest_path) from None
    if m.get("format") != MANIFEST_FORMAT:
        raise SpectrumFormatError("not a ramix dataset manifest", manifest_path)
    if m.get("version") != MANIFEST_VERSION:
        raise SpectrumFormatError(f"unsupported manifest version {m.get('version')}", manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    grid = WavenumberGrid.from_dict(m["grid"])
    names = tuple(m["compounds"])
    packed = {}
    xs, ys, records = [], [], []
    for item in m["items"]:
        label = MixtureLabel.from_vector(item["label"])
        if label.n_components != len(names):
            raise SpectrumFormatError(f"item {item.get('index')} label width does not match compounds", manifest_path)
        ref = item["spectrum"]
        if "intensities" in ref:
            y = Spectrum(grid, ref["intensities"]).intensities
        elif "path" in ref:
            y = read_spectrum_csv(os.path.join(base, ref["path"]), grid=grid).intensities
        else:
            fname = ref["file"]
            if fname not in packed:
                fpath = os.path.join(base, fname)
                try:
                    with open(fpath, "rb") as fh:
                        pgrid, _, PX = unpack_items(fh.read(), fpath)
                except OSError as exc:
                    raise SpectrumFormatError(f"cannot read packed spectra: {exc}", fpath) from None
                if pgrid.n_points != grid.n_points:
                    raise SpectrumFormatError("packed grid does not match manifest grid", fpath)
                packed[fname] = PX
            y = packed[fname][ref["index"]]
        xs.append(y)
        ys.append(label.to_vector())
        records.append({k: v for k, v in item.items() if k not in ("index", "label", "spectrum")})
    if len(xs) != m.get("n_items", len(xs)):
        raise SpectrumFormatError("item count does not match n_items", manifest_path)
    meta = {k: v for k, v in m.items() if k not in ("format", "version", "compounds", "grid", "n_items", "spectra_file", "items")}
    X = np.array(xs, dtype=np.float64).reshape(len(xs), grid.n_points)
    Y = np.array(ys, dtype=np.float64).reshape(len(ys), 2 * len(names))
    return Dataset(X, Y, grid, names, records, meta)
