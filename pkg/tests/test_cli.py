import json

import pytest

from freeact import cli
from freeact.errors import ComputeError


PAULI = """
[group]
factors = [2, 2]

[algebra]
blocks = [1]
scalar_order = 2

[factor_system]
truncation = 2
omega_bicharacter = [[0, 1], [0, 0]]
"""

UNTWISTED = """
[group]
factors = [2, 2]

[algebra]
blocks = [1]
scalar_order = 2
"""


def run(argv, tmp_path, config=None, name="cfg.toml"):
    args = list(argv)
    if config is not None:
        path = tmp_path / name
        path.write_text(config)
        args += ["--config", str(path)]
    report_path = tmp_path / f"report_{abs(hash(tuple(argv)))}.json"
    args += ["--report", str(report_path), "--cache", str(tmp_path / "cache")]
    code = cli.main(args)
    data = json.loads(report_path.read_text()) if report_path.exists() else None
    return code, data


def strip_timings(data):
    return {k: v for k, v in data.items() if k != "timings"}


def test_build_pauli(tmp_path):
    code, data = run(["build"], tmp_path, PAULI)
    assert code == 0
    assert data["dimension"] == 4
    assert data["simple"] is True
    assert data["free"] is True


def test_check_command(tmp_path):
    code, data = run(["check"], tmp_path, PAULI)
    assert code == 0
    assert data["passed"] is True


def test_check_rejects_malformed_omega(tmp_path):
    bad = UNTWISTED + """
[factor_system]
truncation = 2
omega = { "(0,0),(1,0)" = [1] }
"""
    code, data = run(["check"], tmp_path, bad)
    assert code == 1


def test_config_error_on_missing_file(tmp_path):
    code = cli.main(["check", "--config", str(tmp_path / "nope.toml")])
    assert code == 1


def test_cohomology_flags_and_cache(tmp_path):
    argv = ["cohomology", "--group", "2,2", "--blocks", "1", "--roots", "2",
            "--degree", "2"]
    code1, data1 = run(argv, tmp_path)
    assert code1 == 0
    assert data1["invariant_factors"] == [2]
    assert data1["cache_hit"] is False
    code2, data2 = run(argv, tmp_path)
    assert code2 == 0
    assert data2["cache_hit"] is True
    drop = ("cache_hit", "timings")
    assert {k: v for k, v in data1.items() if k not in drop} == \
        {k: v for k, v in data2.items() if k not in drop}


def test_cohomology_closed_form(tmp_path):
    code, data = run(["cohomology", "--group", "0,0", "--blocks", "1",
                      "--degree", "2", "--no-cache"], tmp_path)
    assert code == 0
    assert data["torus_rank"] == 1


def test_classify_determinism(tmp_path):
    code1, data1 = run(["classify"], tmp_path, UNTWISTED, name="a.toml")
    code2, data2 = run(["classify"], tmp_path, UNTWISTED, name="b.toml")
    assert code1 == code2 == 0
    assert strip_timings(data1) == strip_timings(data2)
    assert data1["class_count"] == 2
    assert data1["equivalence_matrix"] == [[1, 0], [0, 1]]


def test_equiv_command(tmp_path):
    config = PAULI + """
[factor_system2]
truncation = 2
omega_bicharacter = [[0, 1], [0, 0]]
"""
    code, data = run(["equiv"], tmp_path, config)
    assert code == 0
    assert data["equivalent"] is True

    config2 = PAULI + """
[factor_system2]
truncation = 2
"""
    code, data = run(["equiv"], tmp_path, config2, name="cfg2.toml")
    assert code == 0
    assert data["equivalent"] is False


def test_twist_command(tmp_path):
    config = UNTWISTED + """
[factor_system]
truncation = 2

[twist]
omega_bicharacter = [[0, 1], [0, 0]]
"""
    code, data = run(["twist"], tmp_path, config)
    assert code == 0
    assert data["verified"] is True
    assert data["omega"]["entries"]


def test_obstruct_command(tmp_path):
    config = UNTWISTED + """
[raw_family]
truncation = 2
omega = { "(1,0),(1,0)" = [1], "(0,1),(1,1)" = [1] }
"""
    code, data = run(["obstruct"], tmp_path, config)
    assert code == 0
    assert data["is_cocycle"] is True
    assert data["chi_trivial"] is True


def test_bundle_command(tmp_path):
    code, data = run(["bundle"], tmp_path, UNTWISTED)
    assert code == 0
    assert data["flip_zero"] is True
    assert data["total_space_points"] == 4
    assert data["bundle_class_count"] == 1
    assert data["h2_total_order"] == 2


def test_bundle_rejects_pauli(tmp_path):
    code, data = run(["bundle"], tmp_path, PAULI)
    assert code == 0
    assert data["flip_zero"] is False
    assert "note" in data


def test_ops_pipeline(tmp_path):
    # build and dump, then restrict through the ops command
    cfg = tmp_path / "pauli.toml"
    cfg.write_text(PAULI)
    sys_path = tmp_path / "system.json"
    code = cli.main(["build", "--config", str(cfg), "--dump-system",
                     str(sys_path), "--report", str(tmp_path / "b.json")])
    assert code == 0 and sys_path.exists()

    ops_cfg = tmp_path / "ops.toml"
    ops_cfg.write_text(f"""
[ops]
op = "restrict"
system = "{sys_path}"
subgroup_generators = [[1, 1]]
""")
    rep = tmp_path / "ops.json"
    code = cli.main(["ops", "--config", str(ops_cfg), "--report", str(rep)])
    assert code == 0
    data = json.loads(rep.read_text())
    assert data["free"] is True
    assert data["result_group"] == [2]


def test_ops_tensor_through_files(tmp_path):
    cfg = tmp_path / "p.toml"
    cfg.write_text(PAULI)
    s1 = tmp_path / "s1.json"
    assert cli.main(["build", "--config", str(cfg), "--dump-system", str(s1),
                     "--report", str(tmp_path / "r.json")]) == 0
    ops_cfg = tmp_path / "t.toml"
    out = tmp_path / "t_out.json"
    ops_cfg.write_text(f"""
[ops]
op = "tensor"
left = "{s1}"
right = "{s1}"
out = "{out}"
""")
    rep = tmp_path / "t.jsonr"
    assert cli.main(["ops", "--config", str(ops_cfg), "--report", str(rep)]) == 0
    data = json.loads(rep.read_text())
    assert data["result_dimension"] == 16
    assert data["free"] is True
    assert out.exists()


def test_ops_mix_through_files(tmp_path):
    # A = C(Z_4) with its own translations as beta; C = the same system
    cfg = tmp_path / "z4.toml"
    cfg.write_text("""
[group]
factors = [4]

[algebra]
blocks = [1]
scalar_order = 4

[factor_system]
truncation = 4
""")
    s1 = tmp_path / "z4.json"
    assert cli.main(["build", "--config", str(cfg), "--dump-system", str(s1),
                     "--report", str(tmp_path / "r.json")]) == 0
    ops_cfg = tmp_path / "mix.toml"
    ops_cfg.write_text(f"""
[ops]
op = "mix"
left = "{s1}"
right = "{s1}"
beta_system = "{s1}"
""")
    rep = tmp_path / "mix.json"
    assert cli.main(["ops", "--config", str(ops_cfg), "--report", str(rep)]) == 0
    data = json.loads(rep.read_text())
    assert data["product_dimension"] == 16
    assert data["product_free"] is True
    assert data["free"] is True
    assert data["result_group"] == [4]


def test_exit_code_two_on_internal_violation(tmp_path, monkeypatch):
    def boom(args, config):
        raise ComputeError("criteria disagree")
    monkeypatch.setitem(cli.COMMANDS, "check", boom)
    cfg = tmp_path / "c.toml"
    cfg.write_text(PAULI)
    assert cli.main(["check", "--config", str(cfg)]) == 2


def test_top_level_group_list_accepted(tmp_path):
    cfg = """
group = [2, 2]

[algebra]
blocks = [1]
scalar_order = 2
"""
    code, data = run(["check"], tmp_path, cfg)
    assert code == 0
    assert data["passed"] is True


def test_canonical_config_bytes_stable():
    a = cli.canonical_config_bytes({"b": [1, 2], "a": {"y": 1, "x": 2}})
    b = cli.canonical_config_bytes({"a": {"x": 2, "y": 1}, "b": [1, 2]})
    assert a == b
