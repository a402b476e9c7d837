import pytest

from studyatlas.bibtex import BibtexError, delatex, family_name, parse_bibtex, split_authors


SIMPLE = b"""
@inproceedings{key2020,
  title = {A Fine Title},
  author = {Smith, Sam and Jones, Jo},
  year = {2020},
}
"""


def test_parses_core_fields():
    entries, warnings = parse_bibtex(SIMPLE)
    assert warnings == []
    entry = entries["key2020"]
    assert entry.entry_type == "inproceedings"
    assert entry.title == "A Fine Title"
    assert entry.year == 2020
    assert entry.authors == ("Sam Smith", "Jo Jones")


def test_missing_year_parses_with_none():
    entries, _ = parse_bibtex(b"@article{k, title={T}, author={A B}}")
    assert entries["k"].year is None


def test_duplicate_key_warns_and_last_wins():
    doc = b"""
    @article{dup, title={First}, year={2001}}
    @article{dup, title={Second}, year={2002}}
    """
    entries, warnings = parse_bibtex(doc)
    assert entries["dup"].title == "Second"
    assert any("duplicate citation key" in str(w) for w in warnings)


def test_unterminated_entry_is_hard_error_with_offset():
    doc = b"@article{broken, title={forever open"
    with pytest.raises(BibtexError) as exc:
        parse_bibtex(doc)
    assert exc.value.offset >= 0
    assert "offset" in str(exc.value)


def test_entry_level_damage_is_warning_not_fatal():
    doc = b"""
    @article{ok1, title={Fine}, year={2020}}
    @article{bad, title = }
    @article{ok2, title={Also Fine}, year={2021}}
    """
    entries, warnings = parse_bibtex(doc)
    assert "ok1" in entries and "ok2" in entries
    assert warnings


def test_quoted_values_and_bare_numbers():
    entries, _ = parse_bibtex(b'@article{k, title="Quoted Title", year=1999, volume=4}')
    entry = entries["k"]
    assert entry.title == "Quoted Title"
    assert entry.year == 1999
    assert entry.get("volume") == "4"


def test_comment_blocks_are_skipped():
    entries, _ = parse_bibtex(b"@comment{not an entry} @article{k, title={T}, year={2000}}")
    assert list(entries) == ["k"]


def test_latin_accents_decode():
    assert delatex(r'R{\"o}ddiger, Tobias') == "Röddiger, Tobias"
    assert delatex(r"Mart{\'i}nez") == "Martínez"
    assert delatex(r"Stra{\ss}e") == "Straße"


def test_split_authors_handles_both_name_orders():
    assert split_authors("Smith, Sam and Ada Alder and others") == ("Sam Smith", "Ada Alder")


def test_family_name():
    assert family_name("Sam Smith") == "Smith"
    assert family_name("") == ""


def test_umlaut_authors_from_bib():
    entries, _ = parse_bibtex(rb'@a{k, author={Elgar, Emil and R{\"o}ddiger, Toni}}')
    assert entries["k"].authors == ("Emil Elgar", "Toni Röddiger")


def test_invalid_utf8_is_hard_error():
    with pytest.raises(BibtexError):
        parse_bibtex(b"@article{k, title={\xff\xfe}}")
