import json
from dataclasses import replace

import numpy as np
import pytest

from cspit import cli
from cspit import experiments as ex
from cspit.traffic import TrafficKind

DAY = 86400.0


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def small(**kw):
    d = {"name": "small", "catalogue_size": 2000, "cache_ratio": 0.005, "request_rate": 500,
         "traffic": ["irm", "hyper10"], "policies": ["lru", "2lru"],
         "sweep": {"parameter": "download_delay", "values": ["0ms", "50ms", "100ms"]}}
    d.update(kw)
    return d


class TestConfig:
    def test_empty_config_gives_defaults(self, tmp_path):
        s = ex.load_config(write(tmp_path, {}))
        assert s.base == ex.DEFAULTS
        sys = ex.cell_system(s, s.traffic[0], "lru", None)
        assert (sys.catalog.K, sys.capacity, sys.M, sys.delay) == (10**6, 1000, 1000, 0.1)
        assert (sys.catalog.alpha, sys.catalog.lambda_total) == (0.8, 1e5)

    def test_negative_delay(self, tmp_path):
        with pytest.raises(ex.ConfigError, match="download_delay"):
            ex.load_config(write(tmp_path, {"download_delay": "-5ms"}))

    def test_parse_error_has_line(self, tmp_path):
        with pytest.raises(ex.ConfigError, match=r"cfg.json:3:"):
            ex.load_config(write(tmp_path, '{\n  "alpha": 0.8,\n  oops\n}'))

    @pytest.mark.parametrize("data,field", [
        ({"alpha": "x"}, "alpha"),
        ({"bogus": 1}, "bogus"),
        ({"mode": "fast"}, "mode"),
        ({"traffic": ["pareto"]}, "traffic"),
        ({"policies": ["fifo"]}, "policies"),
        ({"sweep": {"parameter": "download_delay", "values": ["1s", "0.5s"]}}, "sweep.values"),
        ({"sweep": {"parameter": "request_rate", "values": [0, 10]}}, "sweep.values"),
        ({"catalogue_size": 10.5}, "catalogue_size"),
        ({"simulation": {"requests": 1.5}}, "simulation.requests"),
        ({"request_density": 10}, "request_density"),
    ])
    def test_validation_names_field(self, tmp_path, data, field):
        with pytest.raises(ex.ConfigError, match=field.replace(".", r"\.")):
            ex.load_config(write(tmp_path, data))

    def test_units(self):
        assert ex.parse_duration("100ms") == pytest.approx(0.1)
        assert ex.parse_duration("2 s") == 2.0
        assert ex.parse_duration("1day") == DAY
        assert ex.parse_duration("7days") == 7 * DAY
        assert ex.parse_duration(0.25) == 0.25
        with pytest.raises(ex.ConfigError):
            ex.parse_duration("3 weeks")

    def test_traffic_forms(self, tmp_path):
        s = ex.load_config(write(tmp_path, {"traffic": ["irm", "hyper5",
                                                         {"kind": "hyperz", "z": 3}]}))
        assert [t.label for t in s.traffic] == ["irm", "hyper5", "hyper3"]

    def test_ipp_simulation_refused(self, tmp_path):
        data = {"preset": "fig7", "mode": "simulation"}
        with pytest.raises(ex.ConfigError, match="not practical to simulate"):
            ex.load_config(write(tmp_path, data))


class TestPresets:
    def test_grids_cover_table_ranges(self):
        assert ex.preset("fig3").sweep_values[0] == 0.0
        assert ex.preset("fig3").sweep_values[-1] == pytest.approx(0.3)
        assert ex.preset("fig3").swept_parameter == "download_delay"
        v4 = ex.preset("fig4").sweep_values
        assert (v4[0], v4[-1]) == (1e-4, 0.5)
        v5 = ex.preset("fig5").sweep_values
        assert (v5[0], v5[-1]) == (10.0, 1e6)
        v6 = ex.preset("fig6").sweep_values
        assert (v6[0], v6[-1]) == (1e5, 1e9)
        assert "zdd-lru" in ex.preset("fig6").policies

    @pytest.mark.parametrize("name", ["fig7", "fig8"])
    def test_lifetime_coupling(self, name):
        s = ex.preset(name)
        gamma = 5e4 / DAY
        for t in s.traffic:
            assert t.t_off == pytest.approx(9 * t.t_on)
            sys = ex.cell_system(s, t, "lru", s.sweep_values[0])
            assert sys.catalog.K == round(10 * gamma * t.t_on)
        t = s.traffic[0]
        if name == "fig7":
            sys = ex.cell_system(s, t, "lru", 100.0)
            assert sys.catalog.lambda_total == pytest.approx(100.0 * gamma)
            assert sys.capacity == round(0.01 * sys.catalog.K)
        else:
            sys = ex.cell_system(s, t, "lru", 0.03)
            assert sys.catalog.lambda_total == pytest.approx(1e6 * gamma)
            assert sys.capacity == round(0.03 * sys.catalog.K)

    def test_fig7_days(self):
        assert [t.t_on for t in ex.preset("fig7").traffic] == [DAY, 7 * DAY]
        assert [t.t_on for t in ex.preset("fig8").traffic] == [DAY, 7 * DAY, 30 * DAY]

    def test_fig8_absolute_capacity(self):
        s = ex.preset("fig8", capacity_units="absolute")
        sys = ex.cell_system(s, s.traffic[0], "lru", s.sweep_values[2])
        assert sys.capacity == 1000

    def test_unknown_preset(self):
        with pytest.raises(ex.ConfigError):
            ex.preset("fig9")

    def test_desk_scaling_preserves_ratios(self):
        s = ex.preset("fig3")
        sys = ex.cell_system(s, s.traffic[0], "2lru", 0.1)
        desk = ex.desk_scale(sys, 10**4)
        assert desk.catalog.K == 10**4
        assert desk.capacity / desk.catalog.K == sys.capacity / sys.catalog.K
        assert desk.catalog.lambda_total / desk.catalog.K == pytest.approx(
            sys.catalog.lambda_total / sys.catalog.K)


class TestRun:
    def test_fig3_forwarding_non_increasing(self):
        rows = ex.run_scenario(ex.preset("fig3"))
        assert not any(r.failed for r in rows)
        for pol in ("lru", "2lru"):
            for tr in ("irm", "hyper10"):
                f = [r.p_fwd for r in rows if r.policy == pol and r.traffic == tr]
                assert len(f) == 13 and np.all(np.diff(f) <= 1e-12)

    def test_rows_sorted_and_consistent(self, tmp_path):
        rows = ex.run_scenario(ex.load_config(write(tmp_path, small(mode="both"))))
        keys = [(r.policy, r.traffic, r.param_value, r.source) for r in rows]
        assert keys == sorted(keys)
        assert len(rows) == 3 * 2 * 2 * 2
        for r in rows:
            assert r.p_hit_cs + r.p_hit_pit + r.p_fwd == pytest.approx(1.0, abs=1e-9)
            if r.source == "simulation":
                assert r.half_width is not None and r.t_c is None
            else:
                assert r.half_width is None and r.t_c > 0

    def test_parallel_matches_serial(self, tmp_path):
        s = ex.load_config(write(tmp_path, small()))
        a = ex.run_scenario(s, parallelism=1)
        b = ex.run_scenario(s, parallelism=2)
        strip = lambda rows: [replace(r, wall_time_s=None) for r in rows]  # noqa: E731
        assert strip(a) == strip(b)

    def test_failed_cell_is_marked(self, tmp_path):
        data = small(catalogue_size=500, capacity_units="absolute", policies=["lru"],
                     traffic=["irm"], cache_ratio=None,
                     sweep={"parameter": "cache_capacity", "values": [10, 100, 500]})
        rows = ex.run_scenario(ex.load_config(write(tmp_path, data)))
        assert [r.source for r in rows] == ["analysis", "analysis", "analysis-error"]
        assert "C < K" in rows[-1].error
        assert rows[-1].p_hit_cs is None


class TestCsv:
    def _rows(self):
        return ex.run_scenario(ex.preset("fig4"))

    def test_single_row(self, tmp_path):
        row = ex.ResultRow("s", "lru", "irm", "", None, "analysis", 0.5, 0.25, 0.25)
        p = tmp_path / "one.csv"
        ex.emit_csv([row], p)
        data = p.read_bytes()
        assert data.count(b"\n") == 2 and b"\r" not in data
        assert data.splitlines()[0].decode() == ",".join(ex.CSV_COLUMNS)
        assert data.splitlines()[1] == b"s,lru,irm,,,analysis,0.5,0.25,0.25,,,,"

    def test_empty_rows_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            ex.emit_csv([], tmp_path / "x.csv")

    def test_fig4_round_trip_and_stability(self, tmp_path):
        rows = self._rows()
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        ex.emit_csv(rows, p1)
        assert ex.read_csv(p1) == rows
        ex.emit_csv(ex.read_csv(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()
        # identical runs without timings give identical bytes
        ex.emit_csv(rows, p1, timing=False)
        ex.emit_csv(self._rows(), p2, timing=False)
        assert p1.read_bytes() == p2.read_bytes()

    def test_curves(self, tmp_path):
        rows = ex.run_scenario(ex.load_config(write(tmp_path, small(policies=["lru"],
                                                                    traffic=["irm"]))))
        files = ex.emit_curves(rows, tmp_path / "curves")
        assert len(files) == 3
        lines = files[0].read_text().splitlines()
        assert lines[0].startswith("# download_delay")
        assert len(lines) == 4 and len(lines[1].split()) == 2


class TestCli:
    def test_validate(self, tmp_path, capsys):
        assert cli.main(["validate", "--config", str(write(tmp_path, small()))]) == 0
        bad = write(tmp_path, {"download_delay": -1}, "bad.json")
        assert cli.main(["validate", "--config", str(bad)]) == 1
        assert "download_delay" in capsys.readouterr().err

    def test_missing_file_is_runtime_error(self, tmp_path):
        assert cli.main(["validate", "--config", str(tmp_path / "nope.json")]) == 2

    def test_analyze_and_simulate(self, tmp_path):
        cfg = write(tmp_path, small())
        out = tmp_path / "a.csv"
        assert cli.main(["analyze", "--config", str(cfg), "--out", str(out)]) == 0
        assert {r.source for r in ex.read_csv(out)} == {"analysis"}
        outs = [tmp_path / "s1.csv", tmp_path / "s2.csv"]
        for o in outs:
            assert cli.main(["simulate", "--config", str(cfg), "--requests", "20000",
                             "--seed", "3", "--out", str(o), "--no-timing"]) == 0
        assert outs[0].read_bytes() == outs[1].read_bytes()
        assert {r.source for r in ex.read_csv(outs[0])} == {"simulation"}

    def test_partial_failure_exit_code(self, tmp_path):
        data = small(catalogue_size=500, capacity_units="absolute", policies=["lru"],
                     traffic=["irm"], cache_ratio=None,
                     sweep={"parameter": "cache_capacity", "values": [10, 500]})
        out = tmp_path / "p.csv"
        assert cli.main(["analyze", "--config", str(write(tmp_path, data)),
                         "--out", str(out)]) == 3
        assert out.exists()

    def test_sweep_refuses_ipp_simulation(self, tmp_path, capsys):
        rc = cli.main(["sweep", "--preset", "fig8", "--mode", "simulation",
                       "--out", str(tmp_path / "x.csv")])
        assert rc == 1
        assert "not practical to simulate" in capsys.readouterr().err

    def test_parallel_env(self, monkeypatch):
        monkeypatch.setenv(ex.PARALLEL_ENV, "3")
        assert ex.default_parallelism() == 3
        monkeypatch.setenv(ex.PARALLEL_ENV, "junk")
        assert ex.default_parallelism() == 1


def test_traffic_kind_roundtrip_label():
    assert ex._parse_traffic({"kind": "ipp", "t_on": "1day"}) == TrafficKind("ipp", t_on=DAY)
