"""Filter-list parsing and matching semantics."""

import random

import pytest

from adwar.filters import (
    Anchor,
    FilterError,
    FilterRule,
    RuleKind,
    SkipMarker,
    match_elements,
    match_url,
    parse_filter_line,
    parse_filter_list,
    registrable_domain,
)
from adwar.selectors import match_selector

from conftest import make_frame, make_snapshot, n, random_tree_frame


def test_global_element_hide_rule():
    rule = parse_filter_line("###Ad3Right")
    assert isinstance(rule, FilterRule)
    assert rule.kind is RuleKind.ELEMENT_HIDE
    assert rule.domain_scope == ""
    assert str(rule.selector) == "#Ad3Right"


def test_scoped_element_hide_rule():
    rule = parse_filter_line("liverpoolfc.com###FooterLogos")
    assert rule.kind is RuleKind.ELEMENT_HIDE
    assert rule.domain_scope == "liverpoolfc.com"
    assert str(rule.selector) == "#FooterLogos"


def test_host_anchored_resource_rule():
    rule = parse_filter_line("||atdhe.ws/pp.js")
    assert rule.kind is RuleKind.RESOURCE_BLOCK
    assert rule.anchor is Anchor.HOST
    assert rule.pattern == "atdhe.ws/pp.js"


def test_substring_resource_rule():
    rule = parse_filter_line(".com/doubleclick/")
    assert rule.anchor is Anchor.SUBSTRING


@pytest.mark.parametrize(
    "line, reason_fragment",
    [
        ("! comment", "comment"),
        ("ads.example.com##div:hover", "selector"),
        ("@@||good.example/x.js", "exception"),
        ("||tracker.example/p$image", "option"),
        ("/banner[0-9]+/", "regex"),
        ("", "blank"),
        ("a.com,b.com##.x", "multiple domain"),
    ],
)
def test_unsupported_lines_skip_with_reason(line, reason_fragment):
    marker = parse_filter_line(line)
    assert isinstance(marker, SkipMarker)
    assert reason_fragment in marker.reason


def test_parsing_is_total_over_junk():
    junk = "\n".join(["###ok", "!x", "$$$", "||", "##:hover", "plainpattern"])
    flist = parse_filter_list(junk)
    assert len(flist.rules) + len(flist.skipped) == 6


# ---------------------------------------------------------------------------
# URL matching


FL = parse_filter_list("||atdhe.ws/pp.js\n.com/doubleclick/\n")


def test_host_anchor_hits_exact_and_subdomain():
    assert match_url(FL, "https://atdhe.ws/pp.js")[0]
    assert match_url(FL, "http://atdhe.ws/pp.js")[0]
    assert match_url(FL, "https://cdn.atdhe.ws/pp.js")[0]


def test_host_anchor_respects_label_boundary():
    blocked, _ = match_url(FL, "https://notatdhe.ws/pp.js")
    assert not blocked


def test_substring_rule_matches_anywhere():
    blocked, rule = match_url(FL, "https://x.com/doubleclick/ad.js")
    assert blocked and rule.pattern == ".com/doubleclick/"
    assert not match_url(FL, "https://x.com/doubleclick")[0]


def test_malformed_url_raises():
    with pytest.raises(FilterError):
        match_url(FL, "ftp://example.com/x")
    with pytest.raises(FilterError):
        match_url(FL, "not a url")


def test_first_match_wins():
    flist = parse_filter_list("com/shared\n.com/shared/\n")
    blocked, rule = match_url(flist, "https://a.com/shared/x")
    assert blocked and rule.raw == "com/shared"


def test_boundary_oracle_enumerates_positions():
    """Host-anchored matching equals: 'pattern occurs at some host-label
    boundary of the scheme-stripped URL' by explicit enumeration."""
    pattern = "atdhe.ws/pp.js"
    flist = parse_filter_list(f"||{pattern}\n")
    urls = [
        "https://atdhe.ws/pp.js",
        "https://www.atdhe.ws/pp.js",
        "https://notatdhe.ws/pp.js",
        "https://atdhe.ws/pp.js?x=1",
        "https://atdhe.ws.evil.example/pp.js",
        "https://evil.example/atdhe.ws/pp.js",
        "https://xatdhe.ws/pp.js",
    ]
    for url in urls:
        from urllib.parse import urlsplit

        parts = urlsplit(url)
        host = parts.hostname
        stripped = host + parts.path + (("?" + parts.query) if parts.query else "")
        boundaries = [0] + [i + 1 for i, c in enumerate(host) if c == "."]
        expected = any(stripped[b:].startswith(pattern) for b in boundaries)
        assert match_url(flist, url)[0] == expected, url


# ---------------------------------------------------------------------------
# Element hiding


def _page(host: str):
    frame = make_frame(
        n(
            "html",
            n("body", n("div", id="FooterLogos"), n("div", id="Ad3Right"), n("div", cls="x")),
        ),
        url=f"https://{host}/index.html",
    )
    return make_snapshot(frame, url=f"https://{host}/index.html")


def test_scoped_rule_hides_on_its_domain():
    flist = parse_filter_list("liverpoolfc.com###FooterLogos\n")
    hidden = match_elements(flist, _page("liverpoolfc.com"))
    assert hidden[0] == {3}
    hidden_www = match_elements(flist, _page("www.liverpoolfc.com"))
    assert hidden_www[0] == {3}


def test_scoped_rule_is_inert_elsewhere():
    flist = parse_filter_list("liverpoolfc.com###FooterLogos\n")
    assert match_elements(flist, _page("example.com"))[0] == set()


def test_global_rule_hides_everywhere():
    flist = parse_filter_list("###Ad3Right\n")
    assert match_elements(flist, _page("anything.example"))[0] == {4}


def test_document_root_never_hidden():
    flist = parse_filter_list("##html\n")
    assert match_elements(flist, _page("example.com"))[0] == set()


def test_union_semantics_with_multiple_rules():
    flist = parse_filter_list("###Ad3Right\n##.x\n")
    assert match_elements(flist, _page("example.com"))[0] == {4, 5}


def test_registrable_domain_psl_subset():
    assert registrable_domain("www.example.co.uk") == "example.co.uk"
    assert registrable_domain("a.b.example.com") == "example.com"
    assert registrable_domain("example.org") == "example.org"


def test_bare_tld_scope_never_matches():
    flist = parse_filter_list("com###Ad3Right\n")
    assert match_elements(flist, _page("example.com"))[0] == set()


def test_matches_brute_force_double_loop():
    """Random (list, snapshot) pairs equal the rules x nodes double loop."""
    rng = random.Random(9)
    scopes = ["", "example.com", "other.example", "sub.example.com"]
    for _ in range(100):
        lines = []
        for _ in range(rng.randint(1, 5)):
            scope = rng.choice(scopes)
            sel = rng.choice(["div", ".ad", "#id1", "div.feed", "span > a", ".promo .item"])
            lines.append(f"{scope}##{sel}")
        flist = parse_filter_list("\n".join(lines))
        host = rng.choice(["example.com", "www.example.com", "other.example", "unrelated.test"])
        frame = random_tree_frame(rng, rng.randint(5, 25), url=f"https://{host}/")
        snap = make_snapshot(frame, url=frame.url)
        got = match_elements(flist, snap)[0]

        expected = set()
        for rule in flist.rules:
            scope = rule.domain_scope
            if scope:
                reg = registrable_domain(host)
                if not ((scope == reg or scope.endswith("." + reg))
                        and (host == scope or host.endswith("." + scope))):
                    continue
            expected |= match_selector(frame, rule.selector)
        expected.discard(frame.root_id)
        assert got == expected
