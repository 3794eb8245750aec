import json
import random
import shutil
import subprocess

import pytest
from hypothesis import given, strategies as st

from conftest import fixture_bytes
from hiddenlinks.dom import parse_document
from hiddenlinks.jsinterp import Interpreter
from hiddenlinks.jsparse import decode_string_escapes, encode_hex, parse_program
from hiddenlinks.scripts import (
    ScriptProgram,
    analyze_scripts,
    collect_programs,
    detect_redirection,
    evaluate_decoder_idioms,
    extract_hide_effects,
    fold_string_expressions,
    parse_meta_refresh,
)

CANONICAL = 'document.getElementById("ql1000").style.display = "none"'
PLAIN_H = b'<div id="ql1000"><a href="target.html">keyword</a></div><script>document.getElementById("ql1000").style.display="none";</script>'


def programs_of(markup):
    root = parse_document(markup)
    progs, notes = collect_programs(root)
    return root, progs, notes


# -- escapes ------------------------------------------------------------------

@pytest.mark.parametrize(
    "raw, expected",
    [(r"\x64\x69\x73\x70\x6C\x61\x79", "display"), ("", ""), (r"\x71\x6c\x31\x30\x30\x30", "ql1000"), (r"Ab", "Ab")],
)
def test_decode_string_escapes(raw, expected):
    assert decode_string_escapes(raw) == expected


def test_array_element_with_bare_escape():
    # the published array writes its second escape without the x
    assert decode_string_escapes(r"\x64\69\x73\x70\x6C\x61\x79") == "display"


@given(st.text(alphabet=st.characters(min_codepoint=0, max_codepoint=127)))
def test_escape_round_trip(s):
    assert decode_string_escapes(encode_hex(s)) == s


def test_encode_hex_is_independent_of_decoder():
    assert encode_hex("ql") == "\\x71\\x6c"


# -- folding ------------------------------------------------------------------

def test_concat_fold():
    _, (prog,), _ = programs_of(b'<script>var id = "q" + "l" + "1000";</script>')
    assert fold_string_expressions(prog)['"q" + "l" + "1000"'] == "ql1000"


def test_array_index_fold():
    _, (prog,), _ = programs_of(fixture_bytes("H_hex_array.html"))
    folded = fold_string_expressions(prog)
    assert folded["_xa[1]"] == "none"
    assert sorted(folded[f"_xa[{i}]"] for i in range(5)) == ["display", "getElementById", "none", "ql1000", "style"]


def test_non_constant_not_folded():
    prog = ScriptProgram("var y = foo(); var z = 'x' + y;", 0)
    assert fold_string_expressions(prog) == {}


def test_hex_decoder_payload():
    _, (prog,), _ = programs_of(fixture_bytes("H_hex_eval.html"))
    decoded, flags = evaluate_decoder_idioms(prog)
    assert decoded == [CANONICAL]
    assert flags == []


def test_no_eval_no_decoding():
    assert evaluate_decoder_idioms(ScriptProgram("var a = 'b';", 0)) == ([], [])


def test_non_constant_eval_flagged():
    decoded, flags = evaluate_decoder_idioms(ScriptProgram("eval(location.hash)", 0))
    assert decoded == [] and "eval-nonconstant" in flags


def test_memo_ignores_recycled_node_ids():
    interp = Interpreter()
    old = interp.run('var a = "x" + "y";').body[0]
    fresh = parse_program("b").body[0].expr
    # pretend the allocator handed the old node's address to the fresh one
    interp.memo[id(fresh)] = (old, "stale")
    assert interp.memo_get(fresh) is None
    assert interp.render(fresh) == "b"


def test_budget_stops_infinite_loop():
    root, progs, _ = programs_of(b"<script>while(true){x=1}</script>")
    analysis = analyze_scripts(root, budget=500)
    assert any("budget" in n for n in analysis.notes)


# -- hide effects -------------------------------------------------------------

def test_array_listing_effect():
    root, progs, _ = programs_of(fixture_bytes("H_hex_array.html"))
    (eff,) = extract_hide_effects(progs, root)
    assert (eff.target_kind, eff.target_name, eff.property) == ("by_id", "ql1000", "display_none")
    assert eff.obfuscation == {"hex_escape", "array_indexing"}
    assert eff.evidence == CANONICAL


def test_document_write_wrapper_covers_anchor():
    root, progs, _ = programs_of(fixture_bytes("H_document_write.html"))
    (eff,) = extract_hide_effects(progs, root)
    assert (eff.target_kind, eff.property, eff.obfuscation) == ("written_wrapper", "visibility_hidden", {"doc_write"})
    anchor = next(n for n in root.iter() if n.tag == "a")
    assert eff.covers(anchor)
    assert not any(eff.covers(s) for s in root.iter() if s.tag == "script")


def test_analytics_script_has_no_effects():
    src = b"<script>var _gaq = _gaq || []; _gaq.push(['_trackPageview']); (function(){ var ga = document.createElement('script'); ga.async = true; })();</script>"
    root, progs, _ = programs_of(src)
    assert extract_hide_effects(progs, root) == []


@pytest.mark.parametrize("name", ["H_concat.html", "H_hex_eval.html", "H_hex_array.html"])
def test_obfuscation_variants_are_equivalent(name):
    root, progs, _ = programs_of(fixture_bytes(name))
    proot, pprogs, _ = programs_of(PLAIN_H)
    (eff,) = extract_hide_effects(progs, root)
    (plain,) = extract_hide_effects(pprogs, proot)
    assert (eff.target_kind, eff.target_name, eff.property, eff.evidence) == (
        plain.target_kind, plain.target_name, plain.property, plain.evidence
    )
    assert plain.obfuscation == frozenset()


def test_external_scripts_noted_not_fetched():
    _, progs, notes = programs_of(b'<script src="http://x.cn/a.js"></script><script type="text/vbscript">x</script>')
    assert progs == []
    assert any("http://x.cn/a.js" in n for n in notes)


ids = st.sampled_from(["ql1000", "box", "menu", "nav2", "zz"])


@given(st.lists(ids, max_size=3), st.lists(st.tuples(st.sampled_from(["id", "class"]), ids), min_size=1, max_size=4))
def test_effects_only_target_existing_elements(present, targets):
    body = "".join(f'<div id="{i}" class="{i}c"><a href="/{i}">x</a></div>' for i in present)
    stmts = []
    for kind, name in targets:
        if kind == "id":
            stmts.append(f'document.getElementById("{name}").style.display="none";')
        else:
            stmts.append(f'document.getElementsByClassName("{name}c")[0].style.visibility="hidden";')
    root, progs, _ = programs_of(f"{body}<script>{''.join(stmts)}</script>".encode())
    for eff in extract_hide_effects(progs, root):
        if eff.target_kind == "by_id":
            assert eff.target_name in present
        elif eff.target_kind == "by_class":
            assert eff.target_name[:-1] in present


# -- redirection --------------------------------------------------------------

@pytest.mark.parametrize(
    "content, target",
    [
        ("0;url=http://b.cn", "http://b.cn"),
        ("5; URL='http://b.cn/x'", "http://b.cn/x"),
        ("0, url=http://b.cn", "http://b.cn"),
        ("3;http://b.cn", "http://b.cn"),
        ("10", None),
    ],
)
def test_meta_refresh_grammar(content, target):
    assert parse_meta_refresh(content) == target


def test_meta_and_script_redirects():
    root, progs, _ = programs_of(b'<meta http-equiv="refresh" content="0;url=http://b.cn"><script>location.href="http://c.cn"</script>')
    sigs = detect_redirection(root, progs, None)
    assert [(s.kind, s.target) for s in sigs] == [("meta_refresh", "http://b.cn"), ("script_location", "http://c.cn")]


@pytest.mark.parametrize(
    "code",
    ['window.location = "http://c.cn";', 'document.location.href = "http://c.cn";', 'location.replace("http://c.cn");',
     'top.location="http://"+"c.cn";'],
)
def test_location_forms(code):
    root, progs, _ = programs_of(f"<script>{code}</script>".encode())
    assert [(s.kind, s.target) for s in detect_redirection(root, progs, None)] == [("script_location", "http://c.cn")]


def test_no_redirects():
    root, progs, _ = programs_of(b'<meta name="refresh" content="0;url=http://b.cn"><script>var l = "location";</script>')
    assert detect_redirection(root, progs, None) == []


# -- differential folding -----------------------------------------------------

def _js(s):
    return json.dumps(s)


@st.composite
def string_exprs(draw, depth=0):
    """(javascript source, python value) for pure string expressions."""
    choices = ["lit", "hexlit"] + (["concat", "array", "fromcc", "substring", "charat", "upper", "slice"] if depth < 3 else [])
    kind = draw(st.sampled_from(choices))
    if kind == "lit":
        s = draw(st.text(alphabet="abcXYZ019 ._", max_size=6))
        return _js(s), s
    if kind == "hexlit":
        s = draw(st.text(alphabet="abcdefqlz0", max_size=5))
        return '"' + encode_hex(s) + '"', s
    if kind == "concat":
        (a, av), (b, bv) = draw(string_exprs(depth + 1)), draw(string_exprs(depth + 1))
        return f"({a} + {b})", av + bv
    if kind == "array":
        items = [draw(string_exprs(depth + 1)) for _ in range(draw(st.integers(1, 3)))]
        i = draw(st.integers(0, len(items) - 1))
        return f"[{', '.join(src for src, _ in items)}][{i}]", items[i][1]
    if kind == "fromcc":
        codes = draw(st.lists(st.integers(32, 126), max_size=4))
        return f"String.fromCharCode({', '.join(map(str, codes))})", "".join(map(chr, codes))
    src, v = draw(string_exprs(depth + 1))
    if kind == "upper":
        return f"{src}.toUpperCase()", v.upper()
    if kind == "charat":
        i = draw(st.integers(0, 6))
        return f"{src}.charAt({i})", v[i] if i < len(v) else ""
    a, b = draw(st.integers(0, 7)), draw(st.integers(0, 7))
    if kind == "slice":
        return f"{src}.slice({a}, {b})", v[a:b]
    lo, hi = min(a, len(v)), min(b, len(v))
    lo, hi = min(lo, hi), max(lo, hi)
    return f"{src}.substring({a}, {b})", v[lo:hi]


def fold(src):
    interp = Interpreter()
    interp.run(f"var r = {src};")
    return interp.global_scope.lookup("r")


@given(string_exprs())
def test_folding_matches_python_oracle(expr):
    src, expected = expr
    assert parse_program(f"var r = {src};").errors == []
    assert fold(src) == expected


@pytest.mark.skipif(shutil.which("node") is None, reason="node not installed")
def test_folding_matches_node():
    rnd = random.Random(7)
    exprs = [_random_expr(rnd, 0) for _ in range(300)]
    program = "console.log(JSON.stringify([" + ",".join(exprs) + "]));"
    out = subprocess.run(["node", "-e", program], capture_output=True, text=True, timeout=30, check=True).stdout
    for src, value in zip(exprs, json.loads(out)):
        assert fold(src) == value, src


def _random_expr(rnd, depth):
    kinds = ["lit", "hexlit"] + (["concat", "array", "fromcc", "substring", "charat", "upper", "slice", "parse"] if depth < 3 else [])
    kind = rnd.choice(kinds)
    if kind == "lit":
        return _js("".join(rnd.choice("abcXYZ019 ._") for _ in range(rnd.randint(0, 6))))
    if kind == "hexlit":
        return '"' + encode_hex("".join(rnd.choice("abcdefqlz0") for _ in range(rnd.randint(0, 5)))) + '"'
    if kind == "concat":
        return f"({_random_expr(rnd, depth + 1)} + {_random_expr(rnd, depth + 1)})"
    if kind == "array":
        items = [_random_expr(rnd, depth + 1) for _ in range(rnd.randint(1, 3))]
        return f"[{', '.join(items)}][{rnd.randrange(len(items))}]"
    if kind == "fromcc":
        return f"String.fromCharCode({', '.join(str(rnd.randint(32, 126)) for _ in range(rnd.randint(0, 4)))})"
    if kind == "parse":
        return f'String(parseInt({_js(rnd.choice(["ff", "10", "7z", "0x1f", "-12"]))}, {rnd.choice([10, 16, 8])}))'
    inner = _random_expr(rnd, depth + 1)
    if kind == "upper":
        return f"{inner}.toUpperCase()"
    if kind == "charat":
        return f"{inner}.charAt({rnd.randint(0, 6)})"
    return f"{inner}.{kind}({rnd.randint(0, 7)}, {rnd.randint(0, 7)})"
