import json

import pytest
from hypothesis import given, settings, strategies as st

from geezocr.bpe import (
    BoundaryTokenSet,
    Vocabulary,
    added_tokens_doc,
    bytes_to_unicode,
    decode,
    encode,
    extend_vocab,
    extract_charset,
    pretokenize,
    scan_boundary_tokens,
    verify_roundtrip,
)
from geezocr.exceptions import InvalidUtf8, UnknownId, VocabularyError

from conftest import byte_vocab_dict

GEEZ = st.sampled_from([chr(c) for c in range(0x1200, 0x1249)] + ["፡", "።", "፩", "፲"])
MIXED = st.text(
    alphabet=st.one_of(GEEZ, st.sampled_from(list("abcdefghij XYZ0123456789.,")), st.characters()),
    max_size=40,
)


def test_byte_map_is_a_bijection():
    bmap = bytes_to_unicode()
    assert sorted(bmap) == list(range(256))
    assert len(set(bmap.values())) == 256
    assert bmap[0x20] == "Ġ"
    assert bmap[ord("a")] == "a"


@pytest.mark.parametrize("text, chunks", [
    ("hello world", ["hello", " world"]),
    ("a  b", ["a", " ", " b"]),
    ("a  ", ["a", "  "]),
    (" ", [" "]),
    ("\ta\nb", ["\ta\nb"]),
])
def test_pretokenize(text, chunks):
    assert pretokenize(text) == chunks


def test_extract_charset():
    assert extract_charset(["ሀለ", "ለሐ"]) == ["ሀ", "ለ", "ሐ"]
    assert extract_charset([]) == []
    assert extract_charset(["a ሀ"]) == [" ", "a", "ሀ"]
    assert extract_charset(["a ሀ"], non_ascii_only=True) == ["ሀ"]


def test_extract_charset_normalization_is_opt_in():
    decomposed = "é"
    assert extract_charset([decomposed]) == ["e", "́"]
    assert extract_charset([decomposed], normalize="NFC") == ["é"]


def test_extract_charset_can_exclude_single_tokens(byte_vocab):
    # "a" is a one-byte base token, "é" needs two bytes, "ሀ" three.
    assert extract_charset(["aéሀ"], exclude_vocab=byte_vocab) == ["é", "ሀ"]


def test_fixture_charset_size(transcriptions_100):
    chars = extract_charset(transcriptions_100, non_ascii_only=True)
    assert all(ord(c) >= 0x80 for c in chars)
    assert chars == sorted(set("".join(transcriptions_100)) - set(map(chr, range(128))))


def test_extend_vocab_appends_in_order():
    base = Vocabulary({f"t{i}": i for i in range(300)})
    ext = extend_vocab(base, ["ሀ", "ለ"])
    assert ext.size == 302
    assert ext.token_to_id["ሀ"] == 300 and ext.token_to_id["ለ"] == 301
    assert ext.added_tokens == ("ሀ", "ለ")
    assert ext.merges == base.merges
    assert base.size == 300  # untouched


def test_extend_vocab_skips_present_and_is_idempotent(byte_vocab):
    ext = extend_vocab(byte_vocab, ["ሀ", "a", "ሀ"])
    assert ext.size == byte_vocab.size + 1
    again = extend_vocab(ext, ["ሀ", "a"])
    assert again == ext and again.size == ext.size


def test_toy_merge():
    toy = Vocabulary({"a": 0, "b": 1, "ab": 2}, (("a", "b"),))
    assert encode(toy, "ab") == [2]


def test_merge_priority_and_leftmost():
    toy = Vocabulary({"a": 0, "b": 1, "c": 2, "ab": 3, "bc": 4},
                     (("b", "c"), ("a", "b")))
    # bc outranks ab, so "abc" becomes a + bc.
    assert encode(toy, "abc") == [0, 4]
    toy2 = Vocabulary({"a": 0, "aa": 1}, (("a", "a"),))
    assert encode(toy2, "aaa") == [1, 0]


def test_atomic_override_and_space_marker(byte_vocab):
    v = extend_vocab(byte_vocab, ["ሀ", "ለ"])
    h, l, g = v.token_to_id["ሀ"], v.token_to_id["ለ"], v.token_to_id["Ġ"]
    assert encode(v, "ሀለ") == [h, l]
    # The space cannot merge with the following Ge'ez token: it stays a bare marker.
    assert encode(v, "ሀ ለ") == [h, g, l]
    assert decode(v, [h, g, l]) == "ሀ ለ"


def test_unextended_geez_fragments_into_bytes(english_vocab):
    ids = encode(english_vocab, "ሀ")
    assert len(ids) == 3
    assert decode(english_vocab, ids) == "ሀ"


def test_english_merges_produce_boundary_tokens(english_vocab):
    ids = encode(english_vocab, "the dog the farm")
    toks = [english_vocab.id_to_token[i] for i in ids]
    assert any(t.startswith("Ġ") and len(t) > 1 for t in toks)


def test_decode_errors(byte_vocab):
    assert decode(byte_vocab, []) == ""
    with pytest.raises(UnknownId):
        decode(byte_vocab, [byte_vocab.size])
    lone = bytes_to_unicode()[0xE1]  # lead byte of a 3-byte sequence
    with pytest.raises(InvalidUtf8):
        decode(byte_vocab, [byte_vocab.token_to_id[lone]])


@settings(max_examples=300)
@given(MIXED)
def test_roundtrip_property(geez_vocab, text):
    assert decode(geez_vocab, encode(geez_vocab, text)) == text


@settings(max_examples=200)
@given(MIXED)
def test_encoding_never_emits_unknown_ids(geez_vocab, text):
    ids = encode(geez_vocab, text)
    assert all(0 <= i < geez_vocab.size for i in ids)
    assert ids == encode(geez_vocab, text)


@given(st.text(alphabet=st.sampled_from(["ሀ", "ለ", "ሐ", "መ", "ሠ", "ረ"]), max_size=30))
def test_pure_geez_needs_at_most_one_token_per_char(geez_vocab, text):
    assert len(encode(geez_vocab, text)) <= len(text)


def test_verify_roundtrip(geez_vocab, transcriptions_100):
    report = verify_roundtrip(geez_vocab, transcriptions_100)
    assert report.total == 100 and report.failures == []
    # Characters outside the added set still round-trip through bytes.
    assert verify_roundtrip(geez_vocab, ["ጟ ቐ ፼ emoji 🙂"]).ok


def test_verify_roundtrip_reports_corrupted_vocab():
    d = byte_vocab_dict()
    missing = bytes_to_unicode()[ord("z")]
    del d[missing]
    d = {t: i for i, t in enumerate(d)}
    v = Vocabulary(d)
    report = verify_roundtrip(v, ["abc", "xyz"])
    assert [f[0] for f in report.failures] == [1]
    assert report.failures[0][2] is None


def test_scan_boundary_tokens():
    v = Vocabulary({"Ġ": 0, "Ġthe": 1, "the": 2, "ሀ": 3})
    assert scan_boundary_tokens(v).ids == {0, 1}
    assert scan_boundary_tokens(Vocabulary({"a": 0, "b": 1})).ids == frozenset()


def test_no_added_geez_token_is_a_boundary_token(geez_vocab):
    boundary = scan_boundary_tokens(geez_vocab)
    added_ids = {geez_vocab.token_to_id[t] for t in geez_vocab.added_tokens}
    assert boundary.ids and not (boundary.ids & added_ids)


def test_vocabulary_invariants():
    with pytest.raises(VocabularyError):
        Vocabulary({"a": 0, "b": 2})
    with pytest.raises(VocabularyError):
        Vocabulary({"a": 0, "b": 0})
    with pytest.raises(VocabularyError):
        Vocabulary({"a": 0, "b": 1}, added_tokens=("a",))


def test_file_roundtrip(tmp_path, english_vocab, charset_230):
    vocab_path = tmp_path / "vocab.json"
    vocab_path.write_text(json.dumps(dict(english_vocab.token_to_id), ensure_ascii=False), "utf-8")
    merges_path = tmp_path / "merges.txt"
    merges_path.write_text("#version: 0.2\n" + "".join(f"{a} {b}\n" for a, b in english_vocab.merges),
                           "utf-8")
    ext = extend_vocab(english_vocab, charset_230)
    added_path = tmp_path / "added.json"
    added_path.write_text(json.dumps(added_tokens_doc(ext), ensure_ascii=False), "utf-8")
    loaded = Vocabulary.from_files(vocab_path, merges_path, added_path)
    assert loaded == ext
    assert added_tokens_doc(ext)[0] == {"content": charset_230[0], "id": english_vocab.size}


def test_added_tokens_file_with_wrong_ids_is_rejected(tmp_path, byte_vocab, write_json):
    vocab_path = write_json("vocab.json", dict(byte_vocab.token_to_id))
    bad = write_json("added.json", [{"content": "ሀ", "id": 999}])
    with pytest.raises(VocabularyError):
        Vocabulary.from_files(vocab_path, added_tokens_path=bad)


def test_malformed_merges(tmp_path):
    p = tmp_path / "merges.txt"
    p.write_text("a b c\n", "utf-8")
    from geezocr.bpe import load_merges
    with pytest.raises(VocabularyError):
        load_merges(p)


def test_boundary_set_documents():
    b = BoundaryTokenSet(frozenset({3, 1}))
    assert b.to_dict() == {"marker": "Ġ", "ids": [1, 3]}
    assert BoundaryTokenSet.from_doc(b.to_dict()) == b
    assert BoundaryTokenSet.from_doc([1, 3]).ids == {1, 3}
