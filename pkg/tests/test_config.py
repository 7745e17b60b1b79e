"""Config parsing: strict validation, dotted-path errors, defaults."""

import math

import pytest

from spinnet.config import (
    OPTIMAL,
    ConfigError,
    TauGrid,
    load_run_config,
    parse_params_config,
    parse_run_config,
)


def run_doc(**overrides):
    doc = {
        "ensemble": {"N": 10, "M": 2},
        "couplings": {"chi_nloc": 1.0, "dimensionless": True},
        "protocol": {
            "kind": "gie",
            "tau_grid": {"start": 0.0, "stop": 1.0, "count": 5},
        },
    }
    doc.update(overrides)
    return doc


def gid_doc(**protocol_overrides):
    protocol = {
        "kind": "gid",
        "tau_rot": 0.1,
        "beta": math.pi / 2,
        "tau_grid": {"start": 0.0, "stop": 1.0, "count": 5},
    }
    protocol.update(protocol_overrides)
    return {"ensemble": {"N": 10, "M": 2}, "protocol": protocol}


def test_minimal_gie_doc_parses_with_defaults():
    cfg = parse_run_config(run_doc())
    assert (cfg.N, cfg.M) == (10, 2)
    assert cfg.couplings.chi_nloc == 1.0 and cfg.couplings.dimensionless
    assert cfg.metrology.compute_tilde is False
    assert cfg.metrology.dense_cap == 4096
    assert cfg.output.path is None and cfg.output.format == "csv"
    assert cfg.sweep is None


def test_gid_doc_defaults_couplings_to_pure_nonlocal():
    cfg = parse_run_config(gid_doc())
    c = cfg.couplings
    assert (c.chi_cont, c.chi_loc, c.chi_nloc, c.dimensionless) == (0.0, 0.0, 1.0, True)
    assert cfg.protocol.tau_rot == 0.1
    assert cfg.protocol.beta == math.pi / 2 and cfg.protocol.theta is None


def test_gid_accepts_optimal_sentinel():
    cfg = parse_run_config(gid_doc(tau_rot="optimal"))
    assert cfg.protocol.tau_rot == OPTIMAL


def test_tau_grid_values_linear_and_log():
    lin = TauGrid(start=0.0, stop=1.0, count=5).values()
    assert lin[0] == 0.0 and lin[-1] == 1.0 and len(lin) == 5
    log = TauGrid(start=1e-3, stop=1.0, count=4, spacing="log").values()
    assert log[0] == pytest.approx(1e-3) and log[-1] == pytest.approx(1.0)
    assert log[1] / log[0] == pytest.approx(log[2] / log[1])


@pytest.mark.parametrize(
    "mangle,fragment",
    [
        (lambda d: d.pop("ensemble"), "missing [ensemble]"),
        (lambda d: d.pop("protocol"), "missing [protocol]"),
        (lambda d: d.update(extra={}), "unknown section(s): extra"),
        (lambda d: d["ensemble"].pop("N"), "ensemble.N: required key is missing"),
        (lambda d: d["ensemble"].update(N=0), "ensemble.N: must be at least 1"),
        (lambda d: d["ensemble"].update(M=1), "ensemble.M: need at least two"),
        (lambda d: d["ensemble"].update(N=True), "ensemble.N: expected an integer"),
        (lambda d: d["ensemble"].update(label="x"), "ensemble: unknown key(s): label"),
        (lambda d: d["protocol"].update(kind="foo"), "protocol.kind: expected one of"),
        (lambda d: d["protocol"].update(tau_rot=0.1), "only gid runs have a rotation step"),
        (lambda d: d["protocol"]["tau_grid"].update(count=0), "count: must be at least 1"),
        (
            lambda d: d["protocol"]["tau_grid"].update(start=2.0),
            "stop must exceed start",
        ),
        (
            lambda d: d["protocol"]["tau_grid"].update(spacing="log", start=0.0),
            "log spacing needs start > 0",
        ),
        (lambda d: d["protocol"]["tau_grid"].update(stop=math.inf), "must be finite"),
        (lambda d: d.pop("couplings"), "couplings: required section is missing"),
        (lambda d: d["couplings"].update(chi_loc="big"), "couplings.chi_loc: expected a number"),
        (lambda d: d.update(output={"format": "yaml"}), "output.format: expected one of"),
        (lambda d: d.update(output={"path": ""}), "output.path: must not be empty"),
        (
            lambda d: d.update(sweep={"parameter": "M", "values": [2, 3]}),
            "sweep.parameter: only N sweeps",
        ),
        (
            lambda d: d.update(sweep={"parameter": "N", "values": []}),
            "sweep.values: expected a nonempty list",
        ),
        (
            lambda d: d.update(sweep={"parameter": "N", "values": [10, 10]}),
            "sweep.values: duplicate entries",
        ),
        (
            lambda d: d.update(sweep={"parameter": "N", "values": [10, 0]}),
            "sweep.values[1]: expected an integer >= 1",
        ),
        (
            lambda d: d.update(metrology={"compute_tilde": True, "dense_cap": 5}),
            "exceeds dense_cap",
        ),
    ],
)
def test_bad_run_docs_name_the_key(mangle, fragment):
    doc = run_doc()
    mangle(doc)
    with pytest.raises(ConfigError) as err:
        parse_run_config(doc)
    assert fragment in str(err.value)


@pytest.mark.parametrize(
    "protocol_overrides,fragment",
    [
        ({"tau_rot": None}, "protocol.tau_rot: required key is missing"),
        ({"tau_rot": "best"}, "expected a number or 'optimal'"),
        ({"tau_rot": -0.5}, "must be finite and non-negative"),
        ({"beta": None}, "exactly one of beta, theta"),
        ({"theta": 0.2}, "exactly one of beta, theta"),
        ({"tau_grid": {"start": -1.0, "stop": 1.0, "count": 3}}, "dephasing times start at 0"),
    ],
)
def test_bad_gid_protocols(protocol_overrides, fragment):
    doc = gid_doc(**{k: v for k, v in protocol_overrides.items() if v is not None})
    for key, value in protocol_overrides.items():
        if value is None:
            doc["protocol"].pop(key, None)
    with pytest.raises(ConfigError) as err:
        parse_run_config(doc)
    assert fragment in str(err.value)


def test_gid_couplings_must_stay_dimensionless_nonlocal():
    doc = gid_doc()
    doc["couplings"] = {"chi_nloc": 2.0}
    with pytest.raises(ConfigError) as err:
        parse_run_config(doc)
    assert "gid runs are fixed to chi_nloc = 1" in str(err.value)


def test_compute_tilde_checks_sweep_values_against_cap():
    doc = run_doc(
        metrology={"compute_tilde": True, "dense_cap": 50},
        sweep={"parameter": "N", "values": [10, 100]},
    )
    with pytest.raises(ConfigError) as err:
        parse_run_config(doc)
    assert "N = 100" in str(err.value)


def test_compute_tilde_gid_needs_two_ensembles():
    doc = gid_doc()
    doc["ensemble"]["M"] = 3
    doc["metrology"] = {"compute_tilde": True}
    with pytest.raises(ConfigError) as err:
        parse_run_config(doc)
    assert "only available for M = 2" in str(err.value)


def test_load_reports_missing_file_and_bad_toml(tmp_path):
    with pytest.raises(ConfigError, match="No such file"):
        load_run_config(str(tmp_path / "nope.toml"))
    bad = tmp_path / "bad.toml"
    bad.write_text("[ensemble\nN = 3\n")
    with pytest.raises(ConfigError, match="bad.toml"):
        load_run_config(str(bad))


# ------------------------------------------------------------------ params


def params_doc(**overrides):
    doc = {
        "well": {
            "mass": 1.443e-25,
            "omega_x": 2.0 * math.pi * 100.0,
            "omega_y": 2.0 * math.pi * 150.0,
            "omega_z": 2.0 * math.pi * 200.0,
        },
        "geometry": {"separation": 5e-6},
        "interactions": {"scattering_length": 5.2e-9, "c_dd": 0.0},
    }
    doc.update(overrides)
    return doc


def test_params_doc_parses():
    cfg = parse_params_config(params_doc())
    assert cfg.displacement == (5e-6, 0.0, 0.0)
    assert cfg.c_dd == 0.0
    assert cfg.output.format == "json"
    assert cfg.spec.barrier.height == 0.0


def test_params_displacement_vector_form():
    doc = params_doc(geometry={"displacement": [1e-6, 0.0, 2e-6]})
    cfg = parse_params_config(doc)
    assert cfg.displacement == (1e-6, 0.0, 2e-6)


@pytest.mark.parametrize(
    "mangle,fragment",
    [
        (lambda d: d.pop("well"), "missing [well]"),
        (lambda d: d["well"].update(mass=-1.0), "must be positive"),
        (lambda d: d["well"].update(barrier_height=1e-30), "barrier_width: required"),
        (lambda d: d["geometry"].clear(), "exactly one of separation, displacement"),
        (
            lambda d: d["geometry"].update(displacement=[1e-6, 0.0, 0.0]),
            "exactly one of separation, displacement",
        ),
        (lambda d: d["geometry"].update(separation=-2e-6), "separation: must be positive"),
        (lambda d: d["interactions"].update(c_dd=-1.0), "c_dd: must be non-negative"),
        (lambda d: d.update(output={"format": "csv"}), "coupling reports are JSON"),
    ],
)
def test_bad_params_docs(mangle, fragment):
    doc = params_doc()
    mangle(doc)
    with pytest.raises(ConfigError) as err:
        parse_params_config(doc)
    assert fragment in str(err.value)


def test_params_zero_displacement_rejected():
    doc = params_doc(geometry={"displacement": [0.0, 0.0, 0.0]})
    with pytest.raises(ConfigError, match="finite and nonzero"):
        parse_params_config(doc)
