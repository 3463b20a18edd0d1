#!/usr/bin/env python3

import pytest

from chaincontrol.chain import heisenberg_energies, heisenberg_spec
from chaincontrol.config import Config
from chaincontrol.errors import SpecFileError
from chaincontrol.models import ChainSpec, SwitchSequence
from chaincontrol.parse import (
    load_spec,
    parse_spec,
    read_sequence_csv,
    read_sidecar,
    save_spec,
    serialize_spec,
    spec_hash,
    write_sequence_csv,
)


def test_heisenberg_default_energies():
    spec = parse_spec("n = 4\ncouplings = 1, 2, 3\nactuator = 2\n")
    assert spec.energies == pytest.approx(tuple(heisenberg_energies([1, 2, 3])))
    assert spec.f_off == 0.0
    assert spec.f_on == -2.0


def test_comments_and_list_forms():
    text = """
    # a three-level chain
    n = 3
    couplings = [0.5 1.5]   # brackets and spaces both work
    energies = (0, 0.2, -0.1)
    actuator: 1
    f_on = 2.5
    """
    spec = parse_spec(text)
    assert spec.couplings == (0.5, 1.5)
    assert spec.energies == (0.0, 0.2, -0.1)
    assert spec.f_on == 2.5


def test_serialize_round_trip():
    spec = ChainSpec(n=4, couplings=[0.1, 1 / 3, 2.0], energies=[0, 1e-7, -0.3, 1 / 7], actuator=3, f_off=0.25)
    again = parse_spec(serialize_spec(spec))
    assert again == spec
    assert spec_hash(again) == spec_hash(spec)


def test_hash_tracks_content():
    a = heisenberg_spec(4, [1, 1, 1], actuator=1)
    b = heisenberg_spec(4, [1, 1, 1], actuator=2)
    assert spec_hash(a) != spec_hash(b)
    assert len(spec_hash(a)) == 12


@pytest.mark.parametrize(
    "text, key",
    [
        ("couplings = 1, 1\nactuator = 1\n", "n"),
        ("n = 3\ncouplings = 1, 1\nactuator = 1\ncolour = red\n", "colour"),
        ("n = 3\ncouplings = 1, 1\nactuator = 1\nactuator = 2\n", "actuator"),
        ("n = 3\ncouplings = 1\nactuator = 1\n", "couplings"),
        ("n = 3\ncouplings = 1, 1\nenergies = 0, 1\nactuator = 1\n", "energies"),
        ("n = 3\ncouplings = 1, 1\nactuator = 3\n", "actuator"),
        ("n = 3\ncouplings = 1, x\nactuator = 1\n", "couplings"),
        ("n = 3\ncouplings = 1, inf\nactuator = 1\n", "couplings"),
        ("n = three\ncouplings = 1, 1\nactuator = 1\n", "n"),
    ],
)
def test_malformed_specs_name_the_key(text, key):
    with pytest.raises(SpecFileError) as excinfo:
        parse_spec(text)
    assert excinfo.value.key == key


def test_line_without_assignment():
    with pytest.raises(SpecFileError, match="line 2"):
        parse_spec("n = 3\njust some words\n")


def test_bundled_specs_load():
    for path in sorted(Config.SPECS_DIR.glob("*.spec")):
        spec = load_spec(path)
        assert spec.n >= 4


def test_save_and_load(tmp_path):
    spec = heisenberg_spec(5, [1.0, 0.5, 2.0, 1.5], actuator=2)
    path = save_spec(spec, tmp_path / "nested" / "chain.spec")
    assert load_spec(path) == spec
    with pytest.raises(SpecFileError):
        load_spec(tmp_path / "missing.spec")


def test_sequence_csv_with_sidecar(tmp_path):
    spec = heisenberg_spec(4, [1, 1, 1], actuator=1)
    seq = SwitchSequence(durations=[0.1, 1 / 3, 2.718281828459045, 0.0])
    csv_path, side = write_sequence_csv(seq, tmp_path / "seq.csv", spec=spec, extra={"target": "CNOT"})
    assert csv_path.read_text().splitlines()[0] == "t_k"
    assert read_sequence_csv(csv_path) == seq

    meta = read_sidecar(csv_path)
    assert side.exists()
    assert meta["k"] == 4
    assert meta["f_on"] == -1.0
    assert meta["spec_hash"] == spec_hash(spec)
    assert meta["target"] == "CNOT"
    assert meta["ordering"].startswith("U(t) = U1(t_1) U2(t_2)")


def test_sequence_csv_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("time\n0.5\n")
    with pytest.raises(SpecFileError):
        read_sequence_csv(bad)
    negative = tmp_path / "negative.csv"
    negative.write_text("t_k\n0.5\n-1.0\n")
    with pytest.raises(SpecFileError):
        read_sequence_csv(negative)
    assert read_sidecar(tmp_path / "nothing.csv") is None
