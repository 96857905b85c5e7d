import pytest

from geezocr.corpus import (
    Sample,
    compute_stats,
    ingest_directory,
    load_manifest,
    take_subset,
)
from geezocr.exceptions import DuplicateId, EmptyCorpus, Malformed, OutOfRange

from conftest import FIXTURES


def write(tmp_path, text, name="m.tsv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_manifest(tmp_path):
    p = write(tmp_path, "a\ti/a.png\tሀለ\nb\ti/b.png\tሐመ\nc\ti/c.png\tሀ ለ\n")
    samples = load_manifest(p)
    assert [s.id for s in samples] == ["a", "b", "c"]
    assert samples[2] == Sample("c", "i/c.png", "ሀ ለ")


def test_header_is_skipped(tmp_path):
    p = write(tmp_path, "id\timage_path\ttranscription\na\ti/a.png\tሀ\n")
    assert len(load_manifest(p, header=True)) == 1


def test_malformed_line(tmp_path):
    p = write(tmp_path, "a\ti/a.png\tሀ\nb\ti/b.png\n")
    with pytest.raises(Malformed) as info:
        load_manifest(p)
    assert info.value.line == 2


def test_empty_transcription_rejected(tmp_path):
    with pytest.raises(Malformed):
        load_manifest(write(tmp_path, "a\ti/a.png\t\n"))


def test_duplicate_id(tmp_path):
    with pytest.raises(DuplicateId):
        load_manifest(write(tmp_path, "a\tx\tሀ\na\ty\tለ\n"))


def test_compute_stats():
    s = compute_stats([Sample("1", "", "ሀለ"), Sample("2", "", "ሀለሐመ")])
    assert (s.n_samples, s.mean_len, s.std_len, s.min_len, s.max_len) == (2, 3.0, 1.0, 2, 4)
    one = compute_stats([Sample("1", "", "ሀለሐመሠረሰ")])
    assert (one.mean_len, one.std_len) == (7.0, 0.0)
    with pytest.raises(EmptyCorpus):
        compute_stats([])


def test_fixture_manifest_stats():
    samples = load_manifest(FIXTURES / "manifest_100.tsv")
    stats = compute_stats(samples)
    lengths = [len(s.transcription) for s in samples]
    assert stats.n_samples == 100
    assert stats.min_len == min(lengths) <= stats.mean_len <= stats.max_len == max(lengths)


def test_take_subset():
    samples = [Sample(str(i), "", "ሀ") for i in range(20)]
    assert [s.id for s in take_subset(samples, 0, 10)] == [str(i) for i in range(10)]
    assert [s.id for s in take_subset(samples, 10, 10)] == [str(i) for i in range(10, 20)]
    with pytest.raises(OutOfRange):
        take_subset(samples, 15, 10)


def test_ingest_directory(tmp_path):
    d = tmp_path / "glocr"
    (d / "sub").mkdir(parents=True)
    for stem, text in [("b", "ለሐ"), ("a", "ሀለ")]:
        (d / f"{stem}.png").write_bytes(b"\x89PNG")
        (d / f"{stem}.gt.txt").write_text(text + "\n", encoding="utf-8")
    (d / "sub" / "c.png").write_bytes(b"\x89PNG")
    (d / "sub" / "c.gt.txt").write_text("መ", encoding="utf-8")
    (d / "orphan.png").write_bytes(b"")
    samples = ingest_directory(d)
    assert samples == [Sample("a", "a.png", "ሀለ"), Sample("b", "b.png", "ለሐ"),
                       Sample("c", "sub/c.png", "መ")]
