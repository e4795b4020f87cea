import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from forgerybench.datasets import (
    DatasetManifest,
    EraClass,
    Entry,
    Registry,
    ScaleClass,
    amalgamate,
    apply_declared_subsample,
    load_manifest,
    parse_manifest,
    repeat_seeds,
    stratified_split,
    subsample,
    write_manifest,
)
from forgerybench.errors import (
    InsufficientSamples,
    InvariantViolation,
    ParseError,
    TooFewSamplesPerClass,
    UnknownDataset,
)

from .fixtures import table1


def tiny(ds_id="toy", n_p=5, n_t=5, year=2010, wild=False):
    entries = [Entry(table1.Path(f"/x/{ds_id}/p{i}.png"), "pristine") for i in range(n_p)]
    entries += [Entry(table1.Path(f"/x/{ds_id}/t{i}.png"), "tampered") for i in range(n_t)]
    return DatasetManifest(ds_id, tuple(entries), year, frozenset({"splice"}), wild)


@pytest.mark.parametrize("row", table1.ROWS, ids=[r[0] for r in table1.ROWS])
def test_table_rows_scale_and_era(row):
    ds_id, year, _types, wild, _full, sub, scale = row
    m = table1.manifest(ds_id)
    assert m.counts == sub
    assert m.scale_class is ScaleClass(scale)
    assert m.era_class is (EraClass.OLD if year < 2016 else EraClass.NEW)
    assert m.in_the_wild is wild


def test_columbia_and_casia2_examples():
    col = table1.manifest("Columbia", (183, 180))
    assert (col.scale_class, col.era_class) == (ScaleClass.SMALL, EraClass.OLD)
    casia = table1.manifest("CASIA2", (7491, 5123))
    assert (casia.scale_class, casia.era_class) == (ScaleClass.LARGE, EraClass.OLD)


def test_scale_thresholds():
    assert tiny(n_p=700, n_t=700).scale_class is ScaleClass.LARGE
    assert tiny(n_p=700, n_t=699).scale_class is ScaleClass.MEDIUM
    assert tiny(n_p=200, n_t=200).scale_class is ScaleClass.SMALL
    assert tiny(n_p=200, n_t=201).scale_class is ScaleClass.MEDIUM
    assert tiny(year=2015).era_class is EraClass.OLD
    assert tiny(year=2016).era_class is EraClass.NEW


def test_duplicate_path_rejected():
    e = Entry(table1.Path("/x/a.png"), "pristine")
    with pytest.raises(InvariantViolation):
        DatasetManifest("dup", (e, e), 2010)


def test_declared_scale_must_match():
    with pytest.raises(InvariantViolation):
        DatasetManifest("bad", tiny().entries, 2010, scale_class="LARGE")


def test_registry_round_trip(tmp_path):
    table1.write_registry(tmp_path)
    reg = Registry.discover(tmp_path, check_files=False)
    assert len(reg) == len(table1.ROWS)
    for row in table1.ROWS:
        m = reg[row[0]]
        assert m.counts == row[5] and m.scale_class.value == row[6]
    assert {m.id for m in reg.wild()} == {"WildWeb", "PSBattles", "FRITH", "IMD2020"}
    with pytest.raises(UnknownDataset):
        reg["nope"]


def test_missing_files_listed_not_fatal(tmp_path):
    m = tiny(n_p=2, n_t=2)
    path = write_manifest(m, tmp_path / "toy.manifest")
    (tmp_path / "present.png").write_bytes(b"")
    text = path.read_text() + "pristine,present.png\n"
    loaded = parse_manifest(text, root=tmp_path)
    assert len(loaded.missing) == 4
    assert loaded.counts == (3, 2)


def test_manifest_parse_errors(tmp_path):
    with pytest.raises(ParseError) as info:
        parse_manifest("id: a\nyear: 20x0\n\npristine,a.png\n", check_files=False)
    assert info.value.line == 2
    with pytest.raises(ParseError) as info:
        parse_manifest("id: a\nyear: 2000\n\npristine,a.png\nbogus\n", check_files=False)
    assert info.value.line == 5
    with pytest.raises(ParseError):
        parse_manifest("year: 2000\n\npristine,a.png\n", check_files=False)
    with pytest.raises(InvariantViolation):
        parse_manifest("id: a\nyear: 2000\n\npristine,a.png\ntampered,a.png\n", check_files=False)


def test_load_manifest_relative_paths(tmp_path):
    (tmp_path / "img").mkdir()
    (tmp_path / "img" / "a.png").write_bytes(b"x")
    (tmp_path / "m.manifest").write_text(
        "id: rel\nyear: 2019\ntypes: splice\nwild: yes\n\npristine,img/a.png\ntampered,img/b.png\n")
    m = load_manifest(tmp_path / "m.manifest")
    assert m.entries[0].path == tmp_path / "img" / "a.png"
    assert m.missing == (tmp_path / "img" / "b.png",)
    assert m.in_the_wild and m.era_class is EraClass.NEW


# ---------------------------------------------------------------- sampling


def test_subsample_micc2000():
    full = table1.manifest("MICC2000", (1300, 700))
    sub = subsample(full, 700, 700, seed=1)
    assert sub.counts == (700, 700)
    assert sub.scale_class is ScaleClass.LARGE
    assert sub == subsample(full, 700, 700, seed=1)
    assert set(subsample(full, 1300, 700, seed=5).entries) == set(full.entries)
    with pytest.raises(InsufficientSamples):
        subsample(full, 1301, 1, seed=0)


def test_declared_subsample(tmp_path):
    text = "id: ps\nyear: 2018\nwild: yes\nsubsample: 2/3\n\n" + "".join(
        f"{lab},{lab[0]}{i}.png\n" for lab in ("pristine", "tampered") for i in range(4))
    m = parse_manifest(text, root=tmp_path, check_files=False)
    assert m.subsample == (2, 3) and m.counts == (4, 4)
    assert apply_declared_subsample(m, 0).counts == (2, 3)


def test_amalgamate_six_sources():
    sources = [table1.manifest(i) for i in
               ("CASIA1", "CASIA2", "MICC2000", "MICC220", "COVERAGE", "Columbia")]
    out = amalgamate(sources, (100, 100), seed=42)
    assert out.counts == (600, 600) and len(out) == 1200
    sources_of = {e.source for e in out.entries}
    assert sources_of == {s.id for s in sources}
    for e in out.entries:
        assert e.path.parent.name == e.source  # provenance maps back to one source


def test_amalgamate_four_wild_sources():
    wild = [table1.manifest(i) for i in ("WildWeb", "PSBattles", "FRITH", "IMD2020")]
    with pytest.raises(InsufficientSamples) as info:
        amalgamate(wild, (150, 150), seed=1)
    assert "WildWeb" in str(info.value)
    big = [table1.manifest(i, (200, 200)) for i in ("WildWeb", "PSBattles", "FRITH", "IMD2020")]
    out = amalgamate(big, (150, 150), seed=1)
    assert out.counts == (600, 600) and out.in_the_wild


def test_amalgamate_single_source_is_subsample():
    m = table1.manifest("COVERAGE")
    a = amalgamate([m], (30, 30), seed=9)
    b = subsample(m, 30, 30, seed=9)
    assert [e.path for e in a.entries] == [e.path for e in b.entries]


@pytest.mark.parametrize("n,train,test", [(100, 80, 20), (5, 4, 1)])
def test_split_examples(n, train, test):
    m = tiny(n_p=n, n_t=n)
    plan = stratified_split(m, 0.8, seed=3)
    assert sum(e.label == "pristine" for e in plan.train) == train
    assert sum(e.label == "tampered" for e in plan.test) == test
    assert plan == stratified_split(m, 0.8, seed=3)


def test_split_errors():
    with pytest.raises(TooFewSamplesPerClass):
        stratified_split(tiny(n_p=1, n_t=5), 0.5, 0)
    with pytest.raises(ValueError):
        stratified_split(tiny(), 1.0, 0)


@given(st.integers(2, 60), st.integers(2, 60), st.floats(0.05, 0.95), st.integers(0, 2**32))
def test_split_invariants(n_p, n_t, frac, seed):
    m = tiny(n_p=n_p, n_t=n_t)
    plan = stratified_split(m, frac, seed)
    tr, te = set(plan.train), set(plan.test)
    assert not tr & te and tr | te == set(m.entries)
    for label, n in (("pristine", n_p), ("tampered", n_t)):
        k = sum(e.label == label for e in plan.train)
        assert 1 <= k <= n - 1
        assert abs(k - frac * n) <= 1


def test_repeat_seeds():
    assert repeat_seeds(42) == [42, 43, 44]
