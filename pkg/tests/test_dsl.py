import pytest

from artifact.dsl import DSLError, StrictConstants, UnknownName, Workspace, load
from artifact.heyting import three
from artifact.presheaf import validate_structure

from conftest import FIXTURE_DIR

V_ALGEBRA = "algebra V { elements: z, a, b, t; order: z <= a, z <= b, a <= t, b <= t; }\n"


def test_fixture_files_load():
    ws = load(sorted(FIXTURE_DIR.glob("[cdfp]*.ws")))
    assert {"S2", "S3", "C3", "D4", "F3"} <= set(ws.structures)
    c3 = ws.structure("C3")
    assert c3.algebra is three()
    assert validate_structure(c3) == []
    assert c3.eq(c3.section("a"), c3.section("b")) == c3.algebra.element("m")


def test_declared_algebra_and_comments():
    ws = Workspace()
    names = ws.load_text(V_ALGEBRA + "# a comment\nsignature S { rel R/1; }\n")
    assert names == ["V", "S"]
    assert ws.algebra("V").size == 4


def test_bad_lattice_is_reported_with_line():
    with pytest.raises(DSLError) as info:
        load([FIXTURE_DIR / "bad_lattice.ws"])
    assert info.value.line == 2
    assert "distributivity fails" in str(info.value)


@pytest.mark.parametrize(
    "body,line,fragment",
    [
        ("section x extent top;\n rel R(y) = top;", 3, "unknown section 'y'"),
        ("section x extent top;\n rel R(x) = q;", 3, "'q' is not an element"),
        ("section x extent top;\n identify x|w = x;", 3, "'w' is not an element"),
        ("section x extent top;\n colour x = red;", 3, "unknown structure entry"),
        ("section x extent top;\n rel R(x) = top", 4, "expected ';'"),
    ],
)
def test_structure_errors_point_at_the_entry(body, line, fragment):
    ws = Workspace()
    ws.load_text("signature S { rel R/1; }")
    with pytest.raises(DSLError) as info:
        ws.load_text("structure Z over three sig S {\n " + body + "\n}")
    assert info.value.line == line
    assert fragment in str(info.value)


def test_law_violation_becomes_dsl_error():
    ws = Workspace()
    ws.load_text("signature S { rel R/1; }")
    with pytest.raises(DSLError, match="E\\(a\\|p\\)"):
        ws.load_text("structure Z over three sig S { section a extent top; section b extent m; identify a = b; }")


def test_strict_and_lax_constants():
    text = V_ALGEBRA + "signature S { const c; const d : a; }\n" + \
        "structure X over V sig S { section x extent t; const c = x; const d = x|a; }"
    with pytest.raises(StrictConstants):
        Workspace().load_text(text)
    ws = Workspace(lax_constants=True)
    ws.load_text(text)
    assert not ws.structure("X").is_strict()


def test_unknown_names():
    ws = Workspace()
    with pytest.raises(UnknownName):
        ws.structure("Q")
    with pytest.raises(DSLError, match="unknown signature"):
        ws.load_text("structure Y over two sig Nope { }")
    with pytest.raises(DSLError, match="unexpected character"):
        ws.load_text("signature S { rel R/1; } $")
