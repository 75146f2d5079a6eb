from prosegraph.model import ATOMIC, COMPOSITE
from prosegraph.service import export_svg


def count_groups(svg: str, kind: str) -> int:
    return svg.count(f'data-kind="{kind}"')


def test_zero_prefix_is_fixed_empty_canvas(climate_bundle):
    svg = export_svg(climate_bundle, 0)
    assert svg.startswith('<?xml version="1.0" encoding="UTF-8"?>')
    assert count_groups(svg, "atomic") == 0
    assert count_groups(svg, "composite") == 0
    assert count_groups(svg, "edge") == 0
    assert export_svg(climate_bundle, 0) == svg


def test_full_prefix_element_counts(climate_bundle):
    doc = climate_bundle.document
    svg = export_svg(climate_bundle, len(doc.sentences))
    n_atomic = sum(1 for n in doc.nodes if n.kind == ATOMIC)
    n_composite = sum(1 for n in doc.nodes if n.kind == COMPOSITE)
    assert count_groups(svg, "atomic") == n_atomic
    assert count_groups(svg, "composite") == n_composite
    assert count_groups(svg, "edge") == len(doc.edges)


def test_prefix_one_shows_only_first_sentence(climate_bundle):
    svg = export_svg(climate_bundle, 1)
    assert count_groups(svg, "atomic") == 2
    assert count_groups(svg, "composite") == 0
    assert count_groups(svg, "edge") == 1


def test_split_node_is_container_from_prefix_two(climate_bundle):
    one = export_svg(climate_bundle, 1)
    two = export_svg(climate_bundle, 2)
    nid = "n-rise-of-carbon-dioxide-in-atmosphere"
    assert f'data-kind="atomic" data-id="{nid}"' in one
    assert f'data-kind="composite" data-id="{nid}"' in two


def test_byte_stable_across_exports(climate_bundle):
    for k in range(len(climate_bundle.document.sentences) + 1):
        assert export_svg(climate_bundle, k) == export_svg(climate_bundle, k)


def test_out_of_range_prefix_rejected(climate_bundle):
    import pytest

    with pytest.raises(ValueError):
        export_svg(climate_bundle, 99)
    with pytest.raises(ValueError):
        export_svg(climate_bundle, -1)


def test_labels_are_escaped(climate_bundle):
    svg = export_svg(climate_bundle, len(climate_bundle.document.sentences))
    assert "&" not in svg.replace("&amp;", "").replace("&lt;", "") \
        .replace("&gt;", "").replace("&quot;", "").replace("&#", "")
