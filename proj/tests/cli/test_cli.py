import itertools
import json
import os
import pathlib
import re
import subprocess

import jsonschema
import pytest
from referencing import Registry, Resource

BIN = os.environ["SUBLOCK_BIN"]
BENCH = pathlib.Path(os.environ["SUBLOCK_BENCH_DIR"])
SCHEMAS = pathlib.Path(os.environ["SUBLOCK_SCHEMA_DIR"])

_registry = Registry().with_resources(
    (p.name, Resource.from_contents(json.loads(p.read_text()))) for p in SCHEMAS.glob("*.schema.json")
)


def validate(doc, schema):
    jsonschema.Draft202012Validator(json.loads((SCHEMAS / schema).read_text()), registry=_registry).validate(doc)


def run(*args, cwd=None):
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, cwd=cwd)


# Small .bench reader and evaluator, independent of the library.
def parse_bench(text):
    ins, outs, gates = [], [], {}
    for line in text.splitlines():
        line = line.split("#")[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"(INPUT|OUTPUT)\((.+)\)", line)
        if m:
            (ins if m[1] == "INPUT" else outs).append(m[2].strip())
            continue
        out, rhs = (s.strip() for s in line.split("=", 1))
        kind, args = re.fullmatch(r"(\w+)\((.*)\)", rhs).groups()
        gates[out] = (kind.upper(), [a.strip() for a in args.split(",")])
    return ins, outs, gates


def evaluate(circuit, values):
    ins, outs, gates = circuit
    val = dict(values)

    def get(n):
        if n not in val:
            kind, args = gates[n]
            a = [get(x) for x in args]
            r = {
                "AND": all(a), "NAND": not all(a), "OR": any(a), "NOR": not any(a),
                "XOR": sum(a) % 2 == 1, "XNOR": sum(a) % 2 == 0, "NOT": not a[0],
                "BUFF": a[0], "BUF": a[0],
            }[kind]
            val[n] = r
        return val[n]

    return [get(o) for o in outs]


def key_unlocks(locked_text, original_text, key):
    lk, org = parse_bench(locked_text), parse_bench(original_text)
    keys = [i for i in lk[0] if i.startswith("keyinput")]
    for bits in itertools.product([False, True], repeat=len(org[0])):
        x = dict(zip(org[0], bits))
        if evaluate(lk, {**x, **dict(zip(keys, (c == "1" for c in key)))}) != evaluate(org, x):
            return False
    return True


def xor_lock(text, nets):
    """Routes each named gate output through an XOR with a fresh key input."""
    lines = text.splitlines()
    extra_in, extra_gates = [], []
    for i, net in enumerate(nets):
        lines = [re.sub(rf"^{net}\s*=", f"{net}_pre =", ln) for ln in lines]
        extra_in.append(f"INPUT(keyinput{i})")
        extra_gates.append(f"{net} = XOR({net}_pre, keyinput{i})")
    return "\n".join(extra_in + lines + extra_gates) + "\n"


def normalized(text):
    return sorted(re.sub(r"\s+", "", ln.split("#")[0]) for ln in text.splitlines() if ln.split("#")[0].strip())


@pytest.fixture
def c17():
    return BENCH / "c17.bench"


def test_lock_writes_three_valid_files(tmp_path, c17):
    r = run("lock", c17, "--keys", 4, "--seed", 7, "-o", tmp_path / "out")
    assert r.returncode == 0, r.stderr
    report = json.loads((tmp_path / "out.report.json").read_text())
    keymem = json.loads((tmp_path / "out.keymem.json").read_text())
    validate(report, "lock_report.schema.json")
    validate(keymem, "keymem.schema.json")
    assert report["report"]["key_bits_total"] == 4
    assert report["seed"] == 7 and report["tool_version"] == "0.1.0"
    assert len(parse_bench((tmp_path / "out.bench").read_text())[0]) == 5 + 4


def test_zero_keys_is_the_input(tmp_path, c17):
    r = run("lock", c17, "--keys", 0, "--seed", 1, "-o", tmp_path / "id")
    assert r.returncode == 0, r.stderr
    assert normalized((tmp_path / "id.bench").read_text()) == normalized(c17.read_text())


def test_same_seed_same_bytes(tmp_path):
    src = BENCH / "c432.bench"
    for name in ("a", "b"):
        assert run("lock", src, "--keys", 16, "--seed", 5, "-o", tmp_path / name).returncode == 0
    for ext in (".bench", ".keymem.json", ".report.json"):
        assert (tmp_path / ("a" + ext)).read_bytes() == (tmp_path / ("b" + ext)).read_bytes()


def test_lock_errors(tmp_path, c17):
    assert run("lock", c17, "--keys", 4, "-o", tmp_path / "x").returncode == 1  # no seed
    assert run("lock", c17, "--keys", 40, "--seed", 1, "-o", tmp_path / "x").returncode == 2
    bad = tmp_path / "bad.bench"
    bad.write_text("INPUT(a)\nOUTPUT(y)\ny = FOO(a)\n")
    assert run("lock", bad, "--keys", 2, "--seed", 1).returncode == 1
    assert run("lock", c17, "--keys", 4, "--seed", 1, "--bogus").returncode == 1
    assert run("lock", c17, "--keys", 2, "--seed", 1, "--root", "N1", "-o", tmp_path / "x").returncode == 1


def test_attack_on_sublock_holds(tmp_path, c17):
    assert run("lock", c17, "--keys", 4, "--seed", 3, "-o", tmp_path / "l").returncode == 0
    r = run("attack", tmp_path / "l.bench", "--oracle", c17, "--report", tmp_path / "a.json",
            "--trace", tmp_path / "t.jsonl", "--dump-cnf", tmp_path / "q.cnf")
    assert r.returncode == 0, r.stderr
    rep = json.loads((tmp_path / "a.json").read_text())
    validate(rep, "attack_report.schema.json")
    assert rep["status"] in ("UnsatNoKey", "WrongKey")
    lines = (tmp_path / "t.jsonl").read_text().splitlines()
    assert len(lines) == rep["iterations"]
    for i, ln in enumerate(lines, 1):
        rec = json.loads(ln)
        validate(rec, "attack_trace_record.schema.json")
        assert rec["iter"] == i
    cnf = (tmp_path / "q.cnf").read_text().splitlines()
    header = cnf[0].split()
    assert header[:2] == ["p", "cnf"]
    assert len([c for c in cnf[1:] if c.strip()]) == int(header[3])
    assert all(c.endswith(" 0") or c == "0" for c in cnf[1:] if c.strip())


def test_attack_on_xor_lock_breaks_it(tmp_path, c17):
    text = xor_lock(c17.read_text(), ["N10", "N19"])
    locked = tmp_path / "x.bench"
    locked.write_text(text)
    r = run("attack", locked, "--oracle", c17)
    assert r.returncode == 10, r.stderr
    rep = json.loads(r.stdout)
    validate(rep, "attack_report.schema.json")
    assert rep["status"] == "KeyFound"
    assert key_unlocks(text, c17.read_text(), rep["candidate_key"])


def test_attack_errors(tmp_path, c17):
    locked = tmp_path / "x.bench"
    locked.write_text(xor_lock(c17.read_text(), ["N10", "N11", "N16", "N19", "N22", "N23"]))
    assert run("attack", locked, "--oracle", tmp_path / "missing.bench").returncode == 1
    r = run("attack", locked, "--oracle", c17, "--max-iters", 1)
    assert r.returncode == 4
    rep = json.loads(r.stdout)
    validate(rep, "attack_report.schema.json")
    assert rep["status"] == "BudgetExceeded" and rep["iterations"] == 1


def test_verify(tmp_path, c17):
    assert run("lock", c17, "--keys", 4, "--seed", 2, "-o", tmp_path / "l").returncode == 0
    r = run("verify", tmp_path / "l.bench", "--keymem", tmp_path / "l.keymem.json", "--original", c17)
    assert r.returncode == 0, r.stderr
    validate(json.loads(r.stdout), "verify.schema.json")

    # Flip one key bit in one entry.
    mem = json.loads((tmp_path / "l.keymem.json").read_text())
    entries = mem["blocks"][0]["entries"]
    pattern = sorted(entries)[0]
    entries[pattern] = ("1" if entries[pattern][0] == "0" else "0") + entries[pattern][1:]
    (tmp_path / "bad.json").write_text(json.dumps(mem))
    r = run("verify", tmp_path / "l.bench", "--keymem", tmp_path / "bad.json", "--original", c17)
    assert r.returncode == 5
    verdict = json.loads(r.stdout)
    validate(verdict, "verify.schema.json")
    assert verdict["counterexample"] is not None

    # An XOR lock dressed up with a constant key memory.
    (tmp_path / "x.bench").write_text(xor_lock(c17.read_text(), ["N10", "N19"]))
    mem = {"blocks": [{"key_inputs": ["keyinput0", "keyinput1"], "support": [], "entries": {"": "00"}}]}
    (tmp_path / "x.json").write_text(json.dumps(mem))
    r = run("verify", tmp_path / "x.bench", "--keymem", tmp_path / "x.json", "--original", c17)
    assert r.returncode == 6, r.stderr
    verdict = json.loads(r.stdout)
    validate(verdict, "verify.schema.json")
    assert verdict["universal_key"] is not None

    (tmp_path / "junk.json").write_text("{not json")
    assert run("verify", tmp_path / "l.bench", "--keymem", tmp_path / "junk.json", "--original", c17).returncode == 1


def test_analyze():
    cases = [(["--k", 2], "total", "68"), (["--k", 1], "total", "6"),
             (["--k", 16, "--scheme", "antisat"], "attempts", "256"),
             (["--k", 16, "--scheme", "conventional"], "attempts", "65536")]
    for args, field, want in cases:
        r = run("analyze", *args)
        assert r.returncode == 0, r.stderr
        doc = json.loads(r.stdout)
        validate(doc, "analyze.schema.json")
        assert doc[field] == want
    assert run("analyze", "--k", 21).returncode == 1
    r = run("analyze", "--k", 21, "--approx")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    validate(doc, "analyze.schema.json")
    assert doc["total"] is None and doc["total_log10"] > 6
    assert run("analyze", "--k", 3, "--scheme", "antisat").returncode == 1


def test_report(tmp_path):
    r = run("report", BENCH / "c17.bench", BENCH / "c432.bench", "--keys", 4, "--seed", 1, "--jobs", 2)
    assert r.returncode == 0, r.stderr
    doc = json.loads(r.stdout)
    validate(doc, "design_report.schema.json")
    assert [d["name"] for d in doc["designs"]] == [str(BENCH / "c17.bench"), str(BENCH / "c432.bench")]
    one = run("report", BENCH / "c17.bench", BENCH / "c432.bench", "--keys", 4, "--seed", 1, "--jobs", 1)
    assert one.stdout == r.stdout
