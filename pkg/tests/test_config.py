import pytest
from hypothesis import given, strategies as st

from kramers.config import ConfigError, RunConfig, from_dict, load, loads


def test_defaults_roundtrip():
    cfg = RunConfig()
    again = loads(cfg.to_yaml())
    assert again == cfg
    assert again.hash() == cfg.hash()


def test_hash_independent_of_key_order():
    a = loads("physics: {lam: 20, T: 1.5}\ngrid: {n: 64, L: 10}\n")
    b = loads("grid: {L: 10.0, n: 64}\nphysics: {T: 1.5, lam: 20.0}\n")
    assert a.hash() == b.hash()


def test_hash_changes_with_semantics():
    a = loads("physics: {lam: 20}")
    b = loads("physics: {lam: 20.000001}")
    assert a.hash() != b.hash()


def test_line_diagnostic():
    with pytest.raises(ConfigError, match=r"<string>:\d+:\d+:"):
        loads("physics:\n  lam: [1, 2\n")


@pytest.mark.parametrize("text,where", [
    ("physics: {lamb: 1}", "physics"),
    ("grid: {n: 100}", "grid"),
    ("evolution: {frame: sideways}", "evolution.frame"),
    ("sweep: {values: [1, 3, 2]}", "sweep.values"),
    ("physics: {lam: abc}", "physics.lam"),
    ("pulse: {family: triangle}", "pulse"),
    ("evolution: {dt: 0.3, t_final: 1.0}", "evolution"),
    ("- 1\n- 2\n", "top level"),
])
def test_field_diagnostics(text, where):
    with pytest.raises(ConfigError, match=where.replace(".", r"\.")):
        loads(text)


def test_derived_specs():
    cfg = loads("""
physics: {lam: 8, T: 2, Z: 1.5}
potential: {kind: coulomb}
grid: {dim: 2, n: 64, L: 8}
evolution: {t_final: 4, dt: 0.01, absorber: null}
""")
    assert cfg.pulse_spec().lam == 8.0 and cfg.pulse_spec().T == 2.0
    assert cfg.potential_spec().Z == 1.5
    assert cfg.potential_spec().soft_a == pytest.approx(cfg.grid_spec().h / 2)
    plan = cfg.evolution_plan()
    assert plan.absorber is None and plan.n_steps == 400


def test_with_param():
    cfg = RunConfig()
    assert cfg.with_param("lam", 40.0).physics.lam == 40.0
    with pytest.raises(ConfigError):
        cfg.with_param("nope", 1.0)


def test_load_file(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("physics: {lam: 3}\n")
    assert load(p).physics.lam == 3.0


@given(st.floats(0.1, 1e4), st.floats(0.1, 10), st.sampled_from([1, 2, 3]),
       st.sampled_from([16, 32, 64]), st.booleans())
def test_roundtrip_lossless(lam, T, dim, n, absorb):
    cfg = from_dict({"physics": {"lam": lam, "T": T}, "grid": {"dim": dim, "n": n},
                     "evolution": {"absorber": {"width": 0.1} if absorb else None},
                     "sweep": {"values": [1.0, 2.0, 4.0]}})
    again = loads(cfg.to_yaml())
    assert again == cfg and again.hash() == cfg.hash()
