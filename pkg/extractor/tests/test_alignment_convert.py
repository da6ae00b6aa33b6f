"""TextGrid parsing, 39-label phone mapping, and TSV emission."""

import pytest

from layerdump import (
    ARPABET_39,
    PhoneMapError,
    TextGridError,
    convert_alignments,
    map_phone,
    parse_textgrid,
)
from layerdump.cli import main_convert_align


def textgrid_text(tiers, xmax=2.0):
    """Render {name: [(xmin, xmax, text), ...]} as a long-format TextGrid."""
    lines = [
        'File type = "ooTextFile"',
        'Object class = "TextGrid"',
        "",
        "xmin = 0",
        f"xmax = {xmax}",
        "tiers? <exists>",
        f"size = {len(tiers)}",
        "item []:",
    ]
    for t_i, (name, intervals) in enumerate(tiers.items(), start=1):
        lines += [
            f"    item [{t_i}]:",
            '        class = "IntervalTier"',
            f'        name = "{name}"',
            "        xmin = 0",
            f"        xmax = {xmax}",
            f"        intervals: size = {len(intervals)}",
        ]
        for i, (a, b, text) in enumerate(intervals, start=1):
            lines += [
                f"        intervals [{i}]:",
                f"            xmin = {a}",
                f"            xmax = {b}",
                f'            text = "{text}"',
            ]
    return "\n".join(lines) + "\n"


def write_grid(path, tiers, xmax=2.0):
    path.write_text(textgrid_text(tiers, xmax), encoding="utf-8")


def read_rows(path):
    rows = []
    for line in path.read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        assert len(parts) == 5
        rows.append((parts[0], float(parts[1]), float(parts[2]), parts[3], parts[4]))
    return rows


GRID = {
    "words": [(0.0, 0.31, ""), (0.31, 0.64, "AGREE"), (0.64, 2.0, "")],
    "phones": [
        (0.0, 0.31, ""),
        (0.31, 0.39, "AH0"),
        (0.39, 0.47, "G"),
        (0.47, 0.55, "R"),
        (0.55, 0.64, "IY1"),
        (0.64, 2.0, ""),
    ],
}


class TestPhoneMap:
    def test_inventory_has_39_labels(self):
        assert len(ARPABET_39) == 39

    def test_stress_stripping(self):
        assert map_phone("AY1") == "AY"
        assert map_phone("AH0") == "AH"
        assert map_phone("EY2") == "EY"
        assert map_phone("ZH") == "ZH"

    def test_case_folding(self):
        assert map_phone("ay1") == "AY"

    def test_unmappable(self):
        assert map_phone("SPN?") is None
        assert map_phone("sil") is None
        assert map_phone("") is None


class TestParseTextgrid:
    def test_tiers_and_intervals(self, tmp_path):
        write_grid(tmp_path / "u.TextGrid", GRID)
        tiers = parse_textgrid(tmp_path / "u.TextGrid")
        assert set(tiers) == {"words", "phones"}
        assert len(tiers["phones"]) == 6
        assert tiers["words"][1].text == "AGREE"
        assert tiers["words"][1].xmin == 0.31

    def test_escaped_quotes(self, tmp_path):
        grid = {"words": [(0.0, 1.0, 'SAY ""HI""')], "phones": [(0.0, 1.0, "S")]}
        write_grid(tmp_path / "u.TextGrid", grid)
        tiers = parse_textgrid(tmp_path / "u.TextGrid")
        assert tiers["words"][0].text == 'SAY "HI"'

    def test_not_a_textgrid(self, tmp_path):
        (tmp_path / "u.TextGrid").write_text("just some text\n")
        with pytest.raises(TextGridError, match="no interval tiers"):
            parse_textgrid(tmp_path / "u.TextGrid")


class TestConvert:
    def test_word_and_phone_rows(self, tmp_path):
        write_grid(tmp_path / "utt_a.TextGrid", GRID)
        out = tmp_path / "align.tsv"
        summary = convert_alignments(tmp_path, out)
        assert (summary.n_files, summary.n_phones, summary.n_words) == (1, 4, 1)
        rows = read_rows(out)
        words = [r for r in rows if r[4] == "word"]
        assert words == [("utt_a", 0.31, 0.64, "AGREE", "word")]
        phones = [r for r in rows if r[4] == "phone"]
        assert [r[3] for r in phones] == ["AH", "G", "R", "IY"]
        assert all(r[1] < r[2] for r in rows)

    def test_multiple_files_sorted(self, tmp_path):
        write_grid(tmp_path / "utt_b.TextGrid", GRID)
        write_grid(tmp_path / "utt_a.TextGrid", GRID)
        out = tmp_path / "align.tsv"
        convert_alignments(tmp_path, out)
        utts = [r[0] for r in read_rows(out)]
        assert utts == sorted(utts)
        assert utts[0] == "utt_a" and utts[-1] == "utt_b"

    def test_unmappable_symbols_listed_nothing_written(self, tmp_path):
        grid = {
            "words": [(0.0, 1.0, "UH")],
            "phones": [(0.0, 0.4, "SPN?"), (0.4, 0.7, "AY1"), (0.7, 1.0, "sil")],
        }
        write_grid(tmp_path / "u.TextGrid", grid)
        out = tmp_path / "align.tsv"
        with pytest.raises(PhoneMapError) as err:
            convert_alignments(tmp_path, out)
        assert err.value.symbols == ("SPN?", "sil")
        assert "SPN?" in str(err.value) and "sil" in str(err.value)
        assert not out.exists()

    def test_empty_intervals_skipped(self, tmp_path):
        write_grid(tmp_path / "u.TextGrid", {"words": [(0.0, 2.0, "")], "phones": [(0.0, 2.0, "")]})
        out = tmp_path / "align.tsv"
        summary = convert_alignments(tmp_path, out)
        assert (summary.n_phones, summary.n_words) == (0, 0)
        assert read_rows(out) == []

    def test_zero_length_labeled_interval_rejected(self, tmp_path):
        write_grid(tmp_path / "u.TextGrid", {"phones": [(0.5, 0.5, "AY1")], "words": []})
        with pytest.raises(TextGridError, match="bad phone interval"):
            convert_alignments(tmp_path, tmp_path / "align.tsv")

    def test_missing_tier_warns_but_converts(self, tmp_path, caplog):
        write_grid(tmp_path / "u.TextGrid", {"phones": GRID["phones"]})
        out = tmp_path / "align.tsv"
        with caplog.at_level("WARNING", logger="layerdump.align"):
            summary = convert_alignments(tmp_path, out)
        assert summary.n_words == 0 and summary.n_phones == 4
        assert any("only a phone tier" in m for m in caplog.messages)

    def test_no_alignment_tier_rejected(self, tmp_path):
        write_grid(tmp_path / "u.TextGrid", {"noises": [(0.0, 1.0, "cough")]})
        with pytest.raises(TextGridError, match="no tier named"):
            convert_alignments(tmp_path, tmp_path / "align.tsv")

    def test_empty_dir_rejected(self, tmp_path):
        with pytest.raises(TextGridError, match="no TextGrid files"):
            convert_alignments(tmp_path, tmp_path / "align.tsv")

    def test_tier_name_casing(self, tmp_path):
        grid = {"Words": [(0.0, 1.0, "HI")], "Phones": [(0.0, 0.5, "HH"), (0.5, 1.0, "AY1")]}
        write_grid(tmp_path / "u.TextGrid", grid)
        out = tmp_path / "align.tsv"
        summary = convert_alignments(tmp_path, out)
        assert (summary.n_phones, summary.n_words) == (2, 1)


class TestCli:
    def test_happy_path(self, tmp_path, capsys):
        write_grid(tmp_path / "u.TextGrid", GRID)
        out = tmp_path / "align.tsv"
        rc = main_convert_align(["--in", str(tmp_path), "--out", str(out)])
        assert rc == 0
        assert "4 phone rows, 1 word rows" in capsys.readouterr().out
        assert out.exists()

    def test_unmappable_exits_two(self, tmp_path, capsys):
        write_grid(tmp_path / "u.TextGrid", {"phones": [(0.0, 1.0, "SPN?")], "words": []})
        rc = main_convert_align(["--in", str(tmp_path), "--out", str(tmp_path / "a.tsv")])
        assert rc == 2
        assert "SPN?" in capsys.readouterr().err

    def test_bad_dir_exits_one(self, tmp_path, capsys):
        rc = main_convert_align(["--in", str(tmp_path / "nope"), "--out", str(tmp_path / "a.tsv")])
        assert rc == 1
        assert "not a directory" in capsys.readouterr().err
