import csv
import io
import json

import numpy as np
import pytest

from ptlab.cli import (
    ConfigError,
    emit_report,
    exit_code,
    main,
    parse_config,
    run_check,
    run_converge,
    run_spectrum,
)


def cfg(**doc):
    base = {"V": "0", "L": 8, "N": 201}
    base.update(doc)
    return parse_config(base)


def statuses(report):
    return {c["name"]: c["status"] for c in report["checks"]}


@pytest.fixture
def write_config(tmp_path):
    def write(doc, name="cfg.json"):
        path = tmp_path / name
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc), encoding="utf-8")
        return str(path)

    return write


class TestConfig:
    def test_aliases_and_defaults(self):
        c = parse_config({"V": "x^2", "L": 5, "N": 11})
        assert c.potential_A == "0"
        assert c.mass == 0.5
        assert c.half_width == 5.0

    def test_complex_params(self):
        c = parse_config({"V": "g*x", "L": 1, "N": 5, "params": {"g": [0, 1]}})
        assert c.params == {"g": 1j}

    @pytest.mark.parametrize(
        "doc,field",
        [
            ({"V": "x", "L": 1, "N": 5, "colour": 1}, "colour"),
            ({"L": 1, "N": 5}, "potential_V"),
            ({"V": "x", "L": 1, "N": 4}, "grid"),
            ({"V": "x", "L": "1", "N": 5}, "half_width"),
            ({"V": "x", "L": 1, "N": 5.0}, "grid_points"),
            ({"V": "x", "L": 1, "N": 5, "m": -1}, "mass"),
            ({"V": "g*x", "L": 1, "N": 5}, "g"),
            ({"V": "x", "L": 1, "N": 5, "params": {"g": [1, 2, 3]}}, "params.g"),
            ({"V": "x", "L": 1, "N": 5, "params": {"x": 1}}, "params.x"),
            ({"V": "x", "L": 1, "N": 5, "tolerances": {"huge": 1}}, "tolerances.huge"),
            ({"V": "x +", "L": 1, "N": 5}, "expression"),
            ({"V": "x", "L": 1, "N": 5, "potential_V": "x"}, "V"),
            ({"V": "x", "L": 1, "N": 5, "converge": {"identity": "nope"}}, "converge.identity"),
        ],
    )
    def test_errors_name_field(self, doc, field):
        with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
            parse_config(doc)


class TestCheck:
    def test_cubic_all_exact(self):
        rep = run_check(cfg(V="i*x^3"))
        s = statuses(rep)
        assert s.pop("parity_conditions") == "PASS"
        assert set(s.values()) == {"EXACT"}
        assert list(s) == ["pt_symmetry", "anti_pseudo", "tau_PT_equals_eta", "eta_hermiticity", "pseudo"]
        assert rep["verdict"] == "pass"

    def test_real_linear_fails_and_skips_pseudo(self):
        rep = run_check(cfg(V="x"))
        s = statuses(rep)
        assert s["pt_symmetry"] == "FAIL"
        assert s["pseudo"] == "SKIPPED"
        assert "V_r_even" in rep["checks"][-1]["note"]
        assert exit_code(rep) == 1

    def test_imaginary_gauge(self):
        rep = run_check(cfg(V="x^2", A="g*x", params={"g": [0, 1]}, L=6, N=301))
        s = statuses(rep)
        assert s["parity_conditions"] == "PASS"
        assert s["eta_hermiticity"] == "EXACT"
        assert s["anti_pseudo"] == "DISCRETIZATION"
        assert rep["verdict"] == "pass"

    def test_every_check_once(self):
        names = [c["name"] for c in run_check(cfg(V="x"))["checks"]]
        assert len(names) == len(set(names)) == 6


class TestSpectrum:
    def test_cubic_pairs(self):
        rep = run_spectrum(cfg(V="i*x^3"))
        assert statuses(rep)["conjugate_pairing"] == "PASS"
        assert rep["pairing"]["unmatched"] == []
        assert rep["spectrum"]["count"] == 201

    def test_free_particle(self):
        rep = run_spectrum(cfg(V="0", L=2, N=21))
        h = 2 * 2 / 20
        k = np.arange(1, 22)
        expected = np.sort(np.cos(k * np.pi / 22) ** 2 / h**2)
        got = [e["value"][0] for e in rep["spectrum"]["eigenvalues"]]
        np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-10)
        assert all(e["partner"] == -1 for e in rep["spectrum"]["eigenvalues"])

    def test_oscillator_levels_real_and_doubled(self):
        rep = run_spectrum(cfg(V="x^2", L=10, N=401))
        low = rep["spectrum"]["eigenvalues"][:6]
        assert all(e["partner"] == -1 for e in low)
        np.testing.assert_allclose([e["value"][0] for e in low], [1, 1, 3, 3, 5, 5], atol=2e-2)

    def test_pairing_informational_without_parity(self):
        rep = run_spectrum(cfg(V="x", L=3, N=31))
        assert statuses(rep)["conjugate_pairing"] == "INFO"

    def test_csv(self):
        rep = run_spectrum(cfg(V="i*x^3", L=4, N=21))
        data = emit_report(rep, "csv")
        assert b"\r" not in data
        rows = list(csv.reader(io.StringIO(data.decode())))
        assert rows[0] == ["index", "re", "im", "residual", "pairing_partner_index"]
        assert len(rows) == 22
        partners = {int(r[0]): int(r[4]) for r in rows[1:]}
        for i, j in partners.items():
            assert j == -1 or partners[j] == i
        for r in rows[1:]:
            float(r[1]), float(r[2]), float(r[3])


class TestConverge:
    def test_sin_gauge(self):
        rep = run_converge(cfg(A="sin(x)", L=5), "anti-pseudo", (101, 201, 401))
        assert rep["verdict"] == "pass"
        assert 1.7 <= float(rep["convergence"]["slope"]) <= 2.3

    def test_zero_gauge_exact(self):
        rep = run_converge(cfg(V="x^2", L=5), "anti-pseudo", (21, 41, 81))
        assert rep["convergence"]["exact"] is True
        assert rep["convergence"]["slope"] is None
        assert rep["verdict"] == "pass"

    def test_even_sizes_rejected(self):
        with pytest.raises(ConfigError, match="even"):
            run_converge(cfg(), "anti-pseudo", (100, 200, 400))

    def test_sizes_required(self):
        with pytest.raises(ConfigError):
            run_converge(cfg())

    def test_sizes_from_config(self):
        c = cfg(A="sin(x)", L=5, converge={"identity": "anti-pseudo", "grid_points": [101, 201, 401]})
        assert run_converge(c)["checks"][0]["name"] == "convergence:anti-pseudo"


class TestEmit:
    def test_no_op(self):
        from ptlab.cli import _report

        rep = _report("check", None, [])
        out = json.loads(emit_report(rep))
        assert out["checks"] == [] and out["verdict"] == "no-op"
        assert exit_code(rep) == 0

    def test_verdicts(self):
        from ptlab.cli import _report

        assert _report("check", None, [{"name": "a", "status": "EXACT"}])["verdict"] == "pass"
        rep = _report("check", None, [{"name": "a", "status": "EXACT"}, {"name": "b", "status": "FAIL"}])
        assert rep["verdict"] == "fail"
        assert exit_code(rep) == 1

    def test_json_layout(self):
        data = emit_report(run_check(cfg(V="i*x^3", L=2, N=11)))
        text = data.decode("utf-8")
        doc = json.loads(text)
        assert list(doc) == ["schema", "command", "config", "checks", "verdict"]
        assert doc["config"]["params"] == {}
        assert text.endswith("}\n") and "\r" not in text
        # residuals carry 17 significant digits in scientific notation
        assert '"relative_residual": ' in text
        line = next(ln for ln in text.splitlines() if '"probe_residual"' in ln)
        mantissa = line.split(": ")[1].rstrip(",").split("e")[0].lstrip("-")
        assert len(mantissa.replace(".", "")) == 17

    def test_complex_pairs(self):
        doc = json.loads(emit_report(run_spectrum(cfg(V="i*x^3", L=2, N=11))))
        assert all(len(e["value"]) == 2 for e in doc["spectrum"]["eigenvalues"])

    def test_text(self):
        out = emit_report(run_check(cfg(V="x")), "text").decode()
        assert "verdict: fail" in out

    def test_csv_only_for_spectra(self):
        with pytest.raises(ConfigError):
            emit_report(run_check(cfg()), "csv")


class TestMain:
    def test_exit_codes(self, write_config, capsys):
        assert main(["check", "--config", write_config({"V": "i*x^3", "L": 8, "N": 201})]) == 0
        assert main(["check", "--config", write_config({"V": "x", "L": 8, "N": 201})]) == 1
        assert main(["check", "--config", write_config("{not json")]) == 2
        assert "error" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["check", "--config", str(tmp_path / "absent.json")]) == 2

    def test_overflow_is_error(self, write_config, capsys):
        assert main(["check", "--config", write_config({"V": "0", "A": "i*x^3", "L": 10, "N": 101})]) == 2
        assert "x[" in capsys.readouterr().err

    def test_deterministic_bytes(self, write_config, tmp_path):
        path = write_config({"V": "x^2 + i*x^3", "L": 6, "N": 101})
        outs = []
        for k in range(2):
            out = tmp_path / f"r{k}.json"
            assert main(["spectrum", "--config", path, "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_spectrum_csv_side_output(self, write_config, tmp_path):
        path = write_config({"V": "i*x^3", "L": 4, "N": 21})
        side = tmp_path / "ev.csv"
        assert main(["spectrum", "--config", path, "--out", str(tmp_path / "r.json"), "--csv", str(side)]) == 0
        assert side.read_text().startswith("index,re,im,residual,pairing_partner_index\n")

    def test_converge_cli(self, write_config, capsys):
        path = write_config({"V": "0", "A": "sin(x)", "L": 5, "N": 101})
        assert main(["converge", "--config", path, "--grid-points", "101,201,401", "--format", "text"]) == 0
        assert "slope" in capsys.readouterr().out
        assert main(["converge", "--config", path, "--grid-points", "100,200,400"]) == 2

    def test_bad_subcommand(self):
        with pytest.raises(SystemExit) as info:
            main(["frobnicate"])
        assert info.value.code == 2
