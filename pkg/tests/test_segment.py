from prosegraph.segment import segment_text


def texts(source, spans):
    return [source[a:b] for a, b in spans]


def test_basic_split():
    src = "First sentence. Second one here. Third."
    assert texts(src, segment_text(src)) == [
        "First sentence.", "Second one here.", "Third.",
    ]


def test_abbreviations_do_not_split():
    src = "Dr. Smith measured 3.14 units, e.g. daily. The rest followed."
    assert texts(src, segment_text(src)) == [
        "Dr. Smith measured 3.14 units, e.g. daily.",
        "The rest followed.",
    ]


def test_question_and_exclamation():
    src = "Really? Yes! Fine."
    assert texts(src, segment_text(src)) == ["Really?", "Yes!", "Fine."]


def test_offsets_are_trimmed_and_ascending():
    src = "  One.   Two here.  "
    spans = segment_text(src)
    assert texts(src, spans) == ["One.", "Two here."]
    for (a, b), (c, d) in zip(spans, spans[1:]):
        assert a < b <= c < d


def test_no_trailing_terminator():
    src = "Ends without a period"
    assert texts(src, segment_text(src)) == [src]


def test_empty_text():
    assert segment_text("") == []
    assert segment_text("   ") == []


def test_climate_passage_has_six_sentences(climate_text):
    assert len(segment_text(climate_text)) == 6
