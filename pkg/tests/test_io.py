import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from atomtest import io
from atomtest.empirical import semiparametric_lrt
from atomtest.errors import ConfigError, InputError
from atomtest.inference import ci_beta_delta, ci_mu_delta, simultaneous_region
from atomtest.model import TrialData
from atomtest.simulate import power_study

GOLDEN = Path(__file__).parent / "golden"


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_read_basic(tmp_path):
    d = io.read_trial_csv(_write(tmp_path, "y,r\n0,0\n1.5,0\n2,1\n0,1\n"))
    np.testing.assert_array_equal(d.y, [0, 1.5, 2, 0])
    np.testing.assert_array_equal(d.group, [0, 0, 1, 1])
    assert d.covariates is None


def test_read_covariates_auto_and_selected(tmp_path):
    p = _write(tmp_path, "y,r,x1,x2,note\n0,0,1,2,3\n1.5,0,2,3,4\n2,1,3,5,5\n0,1,4,4,6\n")
    assert io.read_trial_csv(p).covariate_names == ("x1", "x2")
    assert io.read_trial_csv(p, covariates=["x2"]).covariate_names == ("x2",)
    assert io.read_trial_csv(p, covariates=[]).covariates is None
    with pytest.raises(InputError):
        io.read_trial_csv(p, covariates=["x9"])


@pytest.mark.parametrize("text,match", [
    ("y\n1\n", "missing required column"),
    ("y,r\n1,\n", "missing value"),
    ("y,r\nNA,1\n", "missing value"),
    ("y,r\n1,2\n", "r must be 0 or 1"),
    ("y,r\nabc,1\n", "not numeric"),
    ("y,r\n", "no data rows"),
])
def test_read_errors(tmp_path, text, match):
    with pytest.raises(InputError, match=match):
        io.read_trial_csv(_write(tmp_path, text))


def test_read_missing_file(tmp_path):
    with pytest.raises(InputError):
        io.read_trial_csv(tmp_path / "nope.csv")


@given(st.lists(st.tuples(st.floats(-1e6, 1e6), st.integers(0, 1)), min_size=2, max_size=30),
       st.booleans())
def test_csv_round_trip(records, with_cov):
    ys = [r[0] for r in records]
    gs = [r[1] for r in records]
    if len(set(gs)) < 2:
        return
    x = np.arange(len(ys) * 2, dtype=float).reshape(-1, 2) / 7.0 if with_cov else None
    d = TrialData(ys, gs, covariates=x)
    import tempfile
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "rt.csv"
        io.write_trial_csv(d, path)
        back = io.read_trial_csv(path)
    np.testing.assert_array_equal(back.y, d.y)
    np.testing.assert_array_equal(back.group, d.group)
    if with_cov:
        np.testing.assert_array_equal(back.covariates, d.covariates)


def test_bundled_fixtures_round_trip(tmp_path, example_path, covariate_path):
    for path in (example_path, covariate_path):
        d = io.read_trial_csv(path)
        io.write_trial_csv(d, tmp_path / "x.csv")
        assert (tmp_path / "x.csv").read_text() == Path(path).read_text()


def test_bundled_scenarios():
    specs = io.load_scenarios()
    assert [s.name for s in specs] == ["Setup 1", "Setup 2", "Setup 3", "Setup 4"]
    s1 = specs[0]
    assert (s1.mu0, s1.mu1, s1.pi0, s1.pi1, s1.dist) == (3.0, 4.0, 0.35, 0.35, "normal")
    assert specs[3].dist == "t2sq"
    assert (specs[1].mu0, specs[1].mu1, specs[1].pi0, specs[1].pi1) == (3.5, 3.5, 0.4, 0.3)


@pytest.mark.parametrize("text,line,field", [
    ("[a]\nmu0 = 1\nmu1 = 2\npi0 = 0.5\n", 1, "pi1"),
    ("[a]\nmu0 = x\n", 2, "mu0"),
    ("[a]\nmu0 = 1\nmu1 = 2\npi0 = 0.5\npi1 = 0.5\ndist = gamma\n", 6, "dist"),
    ("[a]\nsigma = 1\n", 2, "sigma"),
    ("mu0 = 1\n", 1, None),
    ("[a]\nmu0 1\n", 2, None),
])
def test_config_errors_locate_problem(text, line, field):
    with pytest.raises(ConfigError) as info:
        io.parse_scenarios(text)
    assert info.value.line == line
    assert info.value.field == field


def test_config_invalid_probability():
    with pytest.raises(ConfigError):
        io.parse_scenarios("[a]\nmu0=1\nmu1=1\npi0=0\npi1=0.5\n")


def test_config_comments_and_defaults():
    specs = io.parse_scenarios("# c\n[x] ; note\nmu0=1\nmu1=2\npi0=0.5\npi1=0.5 # t\n")
    assert specs[0].dist == "normal" and specs[0].atom == 0.0 and specs[0].name == "x"


@pytest.mark.parametrize("x,s", [(1.768924258e-07, "1.768924e-07"), (31.095452, "31.09545"),
                                 (0.5238095238, "0.5238095"), (math.inf, "Inf"),
                                 (-math.inf, "-Inf"), (math.nan, "NaN"), (2.0, "2")])
def test_fmt7(x, s):
    assert io.fmt7(x) == s


def _report(example_path):
    d = io.read_trial_csv(example_path)
    res = semiparametric_lrt(d)
    ci_mu = ci_mu_delta(d)
    _, ci_or = ci_beta_delta(d)
    return io.build_report(res, ci_mu, ci_or, 0.95, d.atom)


def test_report_golden(example_path):
    text = io.render_report(_report(example_path))
    assert text == (GOLDEN / "report_splrt.txt").read_text()


def test_report_text_and_json_agree(example_path, tmp_path):
    doc = _report(example_path)
    io.write_json(doc, tmp_path / "r.json")
    back = json.loads((tmp_path / "r.json").read_text())
    assert back == doc
    assert back["schema_version"] == io.SCHEMA_VERSION
    text = io.render_report(back)
    c = back["contrasts"]["difference_in_means_observed"]
    for key in ("estimate", "ci_lower", "ci_upper"):
        assert io.fmt7(c[key]) in text
    assert f"W = {io.fmt7(back['W'])}" in text
    assert f"p = {io.fmt7(back['p_value'])}" in text


def test_report_non_finite_values_serialize(example_path):
    d = TrialData.from_groups([1.0, 2.0, 3.0, 2.5], [2.0, 3.5, 0.0, 4.0, 0.0])
    res = semiparametric_lrt(d)
    ci_mu = ci_mu_delta(d)
    _, ci_or = ci_beta_delta(d)
    doc = io.build_report(res, ci_mu, ci_or, 0.95, 0.0)
    assert doc["contrasts"]["odds_ratio_observed"]["estimate"] == 0.0
    assert doc["contrasts"]["odds_ratio_observed"]["ci_lower"] == 0.0
    assert json.loads(json.dumps(doc)) == doc
    assert "lower_open" in doc["flags"]


def test_region_outputs(example_path, tmp_path):
    d = io.read_trial_csv(example_path)
    reg = simultaneous_region(d, resolution=15)
    io.write_region_csv(reg, tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "m,b,W,member"
    assert len(lines) == 226
    for line in lines[1:]:
        m, b, w, member = line.split(",")
        assert int(member) == (float(w) <= reg.threshold)
    root = ET.fromstring(io.region_svg(reg))
    assert root.tag.endswith("svg")
    assert any(el.tag.endswith("path") for el in root.iter())


def test_contour_segments_simple_square():
    vals = np.array([[0.0, 2.0], [0.0, 2.0]])
    segs = list(io._contour_segments(vals, 1.0))
    assert len(segs) == 1
    (a, b) = segs[0]
    assert {round(a[1], 9), round(b[1], 9)} == {0.5}


def test_power_outputs(tmp_path):
    specs = io.parse_scenarios("[a]\nmu0=3\nmu1=4\npi0=0.5\npi1=0.5\n")
    t = power_study(specs, [10], reps=100, methods=("wilcoxon",))
    io.write_power_csv(t, tmp_path / "p.csv")
    io.write_power_long(t, tmp_path / "l.csv")
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == ",".join(io.POWER_COLUMNS)
    long = (tmp_path / "l.csv").read_text().splitlines()
    assert long[0] == "scenario,method,n,power,mc_se"
    assert long[1].startswith("a,wilcoxon,10,")
