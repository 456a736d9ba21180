"""Static audit: the library never touches floating point."""
import ast
from pathlib import Path

import pytest

import twistlog

SRC = sorted(Path(twistlog.__file__).parent.glob("*.py"))
BANNED_MODULES = {"math", "cmath", "numpy", "decimal", "fractions", "statistics"}
BANNED_ATTRS = {("time", "time"), ("time", "perf_counter"), ("time", "monotonic")}


def _tree(path):
    return ast.parse(path.read_text(), filename=str(path))


@pytest.mark.parametrize("path", SRC, ids=lambda p: p.name)
def test_no_float_literals(path):
    bad = [n.lineno for n in ast.walk(_tree(path))
           if isinstance(n, ast.Constant) and isinstance(n.value, (float, complex))]
    assert not bad, f"float/complex literal at lines {bad}"


@pytest.mark.parametrize("path", SRC, ids=lambda p: p.name)
def test_no_float_imports(path):
    bad = []
    for n in ast.walk(_tree(path)):
        if isinstance(n, ast.Import):
            bad += [a.name for a in n.names if a.name.split(".")[0] in BANNED_MODULES]
        elif isinstance(n, ast.ImportFrom) and n.module and n.module.split(".")[0] in BANNED_MODULES:
            bad.append(n.module)
    assert not bad


@pytest.mark.parametrize("path", SRC, ids=lambda p: p.name)
def test_float_name_only_as_rejection(path):
    tree = _tree(path)
    allowed = set()
    for n in ast.walk(tree):
        # isinstance(x, float) or isinstance(x, (float, ...)) is the only permitted use
        if isinstance(n, ast.Call) and isinstance(n.func, ast.Name) and n.func.id == "isinstance":
            for sub in ast.walk(n.args[1]):
                allowed.add(id(sub))
    bad = [n.lineno for n in ast.walk(tree)
           if isinstance(n, ast.Name) and n.id in ("float", "complex") and id(n) not in allowed]
    assert not bad, f"float used at lines {bad}"


@pytest.mark.parametrize("path", SRC, ids=lambda p: p.name)
def test_no_literal_true_division(path):
    bad = [n.lineno for n in ast.walk(_tree(path))
           if isinstance(n, ast.BinOp) and isinstance(n.op, ast.Div)
           and isinstance(n.left, ast.Constant) and isinstance(n.right, ast.Constant)]
    assert not bad, f"int/int division at lines {bad}"


@pytest.mark.parametrize("path", SRC, ids=lambda p: p.name)
def test_timing_uses_integer_clock(path):
    bad = [n.lineno for n in ast.walk(_tree(path))
           if isinstance(n, ast.Attribute) and isinstance(n.value, ast.Name)
           and (n.value.id, n.attr) in BANNED_ATTRS]
    assert not bad
