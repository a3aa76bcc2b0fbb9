import json
import os

import numpy as np
import pytest

from ramix import config as rconfig
from ramix.augment import AugmentConfig
from ramix.checkpoint import dump_checkpoint, load_checkpoint, parse_checkpoint, save_checkpoint
from ramix.dataset import Dataset, build_dataset, build_test_set, pack_items, read_dataset, unpack_items, write_dataset
from ramix.errors import CheckpointError, ConfigError, SpectrumFormatError
from ramix.model import ModelConfig, build_model
from ramix.spectrum import CANONICAL_GRID
from ramix.synthgen import MixtureGenConfig, standard_library

SMALL = ModelConfig(conv_blocks=((3, 5),), dense_sizes=(4,), variant="ramixnet2")


def test_checkpoint_round_trip_bitwise(tmp_path):
    m = build_model(SMALL, seed=9)
    x = np.random.default_rng(0).random((3, 2201))
    before = m.forward(x)
    path = tmp_path / "m.rmxc"
    save_checkpoint(m, path, {"note": "x"})
    m2, meta = load_checkpoint(path)
    after = m2.forward(x)
    assert meta == {"note": "x"}
    assert all(np.array_equal(before[k], after[k]) for k in before)
    assert dump_checkpoint(m2, meta) == path.read_bytes()


def test_checkpoint_corruption(tmp_path):
    data = dump_checkpoint(build_model(SMALL))
    for cut in (3, 20, len(data) - 100, len(data) - 1):
        with pytest.raises(CheckpointError):
            parse_checkpoint(data[:cut])
    flipped = bytearray(data)
    flipped[-20] ^= 0xFF
    with pytest.raises(CheckpointError, match="checksum"):
        parse_checkpoint(bytes(flipped))
    with pytest.raises(CheckpointError, match="magic"):
        parse_checkpoint(b"XXXX" + data[4:])
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing.rmxc")


def test_checkpoint_variant_mismatch():
    data = dump_checkpoint(build_model(ModelConfig(conv_blocks=((2, 3),), dense_sizes=(3,))))
    with pytest.raises(CheckpointError, match="ramixnet1"):
        parse_checkpoint(data, variant="ramixnet2")
    parse_checkpoint(data, variant="ramixnet1")


def test_dataset_counts():
    lib = standard_library()
    assert len(build_dataset(lib, MixtureGenConfig(10))) == 9999
    small = standard_library(2)
    assert len(build_dataset(small, MixtureGenConfig(2))) == 3
    ds = build_dataset(small, MixtureGenConfig(4), AugmentConfig(seed=1))
    assert len(ds) == 15 * 3
    kinds = [r["kind"] for r in ds.records[:3]]
    assert kinds == ["clean", "augmented", "augmented"]
    assert ds.records[1]["provenance"]["baseline"]["family"] in ("gaussian", "sigmoid", "exponential", "polynomial")


def test_dataset_augmented_count_full():
    # 9,999 mixtures x (1 clean + 2 augmented)
    from ramix.synthgen import count_mixtures

    cfg = AugmentConfig()
    assert count_mixtures(4, MixtureGenConfig(10)) * (int(cfg.include_clean) + cfg.repeats) == 29997


def test_dataset_write_read(tmp_path):
    lib = standard_library(2)
    ds = build_dataset(lib, MixtureGenConfig(3), AugmentConfig(seed=2, repeats=1))
    path = write_dataset(tmp_path / "d", ds)
    back = read_dataset(path)
    assert back.names == ds.names and back.grid == ds.grid
    assert np.array_equal(back.Y, ds.Y)
    assert np.array_equal(back.X, ds.X.astype(np.float32).astype(np.float64))
    assert back.records[3]["provenance"] == ds.records[3]["provenance"]
    again = write_dataset(tmp_path / "e", back)
    assert open(again, "rb").read() == open(path, "rb").read()


def test_manifest_inline_and_csv_refs(tmp_path, library):
    from ramix.spectrum import write_spectrum_csv

    write_spectrum_csv(library.pure_spectra[0], tmp_path / "a.csv")
    manifest = {
        "format": "ramix-dataset",
        "version": 1,
        "compounds": ["aniline", "o-xylene"],
        "grid": CANONICAL_GRID.to_dict(),
        "items": [
            {"index": 0, "label": [1, 0, 1.0, 0], "spectrum": {"path": "a.csv"}},
            {"index": 1, "label": [0, 1, 0, 0.5], "spectrum": {"intensities": [0.5] * 2201}},
        ],
    }
    (tmp_path / "m.json").write_text(json.dumps(manifest))
    ds = read_dataset(tmp_path / "m.json")
    assert np.array_equal(ds.X[0], library.pure_spectra[0].intensities)
    assert ds.X[1, 7] == 0.5 and ds.ratios[1].tolist() == [0.0, 0.5]


def test_packed_corruption():
    data = pack_items(CANONICAL_GRID, np.zeros((2, 4)), np.zeros((2, 2201)))
    grid, Y, X = unpack_items(data)
    assert grid == CANONICAL_GRID and X.shape == (2, 2201)
    with pytest.raises(SpectrumFormatError):
        unpack_items(data[:-4])
    with pytest.raises(SpectrumFormatError):
        unpack_items(b"NOPE" + data[4:])


def test_test_set(library):
    ts = build_test_set(library, seed=3)
    assert len(ts) == 6 and [r["name"] for r in ts.records] == ["S1", "S2", "S3", "S4", "S5", "S6"]
    assert ts.presence.tolist()[0] == [0, 1, 0, 1]


def test_config_defaults_and_overrides(tmp_path):
    cfg = rconfig.resolve()
    assert cfg == rconfig.DEFAULTS
    assert rconfig.train(cfg).epochs == 50
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"seed": 4, "train": {"epochs": 7}}))
    cfg = rconfig.load(p, {"train": {"epochs": 2}, "model": {"variant": "ramixnet2"}})
    assert cfg["seed"] == 4 and cfg["train"]["epochs"] == 2 and cfg["train"]["batch_size"] == 32
    assert rconfig.model(cfg, 4, 2201).variant == "ramixnet2"
    assert rconfig.augment(cfg).seed == 4
    assert rconfig.augment(rconfig.resolve({"augment": {"enabled": False}})) is None


@pytest.mark.parametrize(
    "raw",
    [{"bogus": 1}, {"train": {"epochs": 0}}, {"model": {"variant": "x"}}, {"augment": {"families": ["cubic"]}}, {"seed": -1}],
)
def test_config_rejects(raw):
    with pytest.raises(ConfigError):
        rconfig.resolve(raw)


def test_config_unreadable(tmp_path):
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ConfigError):
        rconfig.load(tmp_path / "bad.json")
