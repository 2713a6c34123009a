import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import circle_fit
from stgat.data import (
    CSV_COLUMNS,
    DataError,
    Engagement,
    GeneratorSpec,
    dataset_spec,
    denormalize,
    engagement_from_csv,
    engagement_to_csv,
    generate_engagement,
    generator_specs_from_dict,
    load_generator_config,
    low_pass_filter,
    normalize_window,
    read_csv,
    read_dir,
    split_dataset,
    stack_windows,
    windowize,
    write_csv,
)


def synthetic(pos, rate=2.0, blue=None, eid="e"):
    pos = np.asarray(pos, dtype=np.float64)
    T, n, _ = pos.shape
    blue = n if blue is None else blue
    return Engagement(eid, blue, n - blue, rate, np.arange(T) / rate, pos, np.zeros_like(pos), np.zeros((T, n)))


class TestGenerator:
    def test_straight_line_is_collinear_and_even(self):
        e = generate_engagement(GeneratorSpec(1, 0, duration_s=30, seed=3, script=[{"kind": "straight", "duration": 60}]))
        p = e.pos[:, 0]
        steps = np.diff(p, axis=0)
        assert np.allclose(steps, steps[0], atol=1e-12)
        assert np.allclose(np.linalg.norm(steps, axis=1), 0.25 / 2.0, atol=1e-12)
        assert np.linalg.matrix_rank(p - p[0], tol=1e-9) == 1

    @pytest.mark.parametrize("rate", [0.05, -0.1, 0.2])
    def test_level_turn_is_circle_of_radius_v_over_omega(self, rate):
        spec = GeneratorSpec(1, 0, duration_s=60, rate_hz=2, seed=1,
                             script=[{"kind": "level_turn", "rate": rate, "duration": 100}])
        p = generate_engagement(spec).pos[:, 0]
        assert np.ptp(p[:, 2]) < 1e-12
        centre, radius = circle_fit(p[:, :2])
        assert radius == pytest.approx(0.25 / abs(rate), rel=1e-9)
        assert np.allclose(np.linalg.norm(p[:, :2] - centre, axis=1), radius, rtol=1e-9)

    def test_climb_gains_altitude(self):
        e = generate_engagement(GeneratorSpec(1, 0, duration_s=30, seed=0,
                                              script=[{"kind": "climb", "angle": 0.2, "duration": 60}]))
        assert np.all(np.diff(e.pos[:, 0, 2]) >= 0) and e.pos[-1, 0, 2] > e.pos[0, 0, 2] + 1.0

    def test_determinism(self):
        spec = GeneratorSpec(2, 2, duration_s=40, seed=11, noise_sigma=0.01)
        a, b = generate_engagement(spec), generate_engagement(spec)
        assert engagement_to_csv(a) == engagement_to_csv(b)
        assert not np.array_equal(a.pos, generate_engagement(GeneratorSpec(2, 2, duration_s=40, seed=12)).pos)

    @given(st.integers(0, 500), st.sampled_from([(1, 1), (2, 2), (4, 4)]), st.sampled_from([0.0, 0.005, 0.05]),
           st.sampled_from([2.0, 50.0]))
    def test_displacement_bound(self, seed, teams, sigma, rate):
        spec = GeneratorSpec(*teams, duration_s=20, rate_hz=rate, seed=seed, noise_sigma=sigma)
        e = generate_engagement(spec)
        step = np.linalg.norm(np.diff(e.pos, axis=0), axis=-1)
        # 1e-9 km slack covers float64 spacing of coordinates near 4000 km
        assert np.all(step <= spec.max_speed / rate + 4 * sigma + 1e-9)
        assert np.all(np.isfinite(e.pos)) and np.all(e.speed >= 0)

    def test_red_pursues_blue(self):
        e = generate_engagement(GeneratorSpec(1, 1, duration_s=150, seed=2))
        gap = np.linalg.norm(e.pos[:, 0] - e.pos[:, 1], axis=-1)
        assert gap[-1] < gap[0]

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            generate_engagement(GeneratorSpec(1, 0, duration_s=3, rate_hz=2))
        with pytest.raises(ValueError):
            generate_engagement(GeneratorSpec(0, 0))

    def test_default_dataset_composition(self):
        specs = dataset_spec(seed=0)
        counts = {}
        for s in specs:
            counts[(s.blue, s.red)] = counts.get((s.blue, s.red), 0) + 1
        assert counts == {(4, 4): 8, (2, 2): 12, (1, 1): 10}
        assert len({s.id for s in specs}) == 30

    def test_config_file(self, tmp_path):
        cfg = {"seed": 4, "duration_s": 20, "scenarios": [{"blue": 2, "red": 1, "count": 3}]}
        (tmp_path / "g.json").write_text(json.dumps(cfg))
        specs = load_generator_config(tmp_path / "g.json")
        assert [s.id for s in specs] == ["2v1-000", "2v1-001", "2v1-002"]
        with pytest.raises(DataError):
            generator_specs_from_dict({"bogus": 1})
        with pytest.raises(DataError):
            load_generator_config(tmp_path / "missing.json")


class TestFilter:
    def test_window_one_is_identity(self, rng):
        e = synthetic(rng.normal(size=(20, 2, 3)))
        assert np.array_equal(low_pass_filter(e, 1).pos, e.pos)

    def test_constant_unchanged(self):
        e = synthetic(np.full((15, 2, 3), 7.25))
        assert np.array_equal(low_pass_filter(e, 5).pos, e.pos)

    def test_linear_unchanged(self):
        t = np.arange(30.0)[:, None, None]
        e = synthetic(t * np.array([0.1, -0.2, 0.05]) + np.array([3590.0, 4100.0, 6.0]))
        assert np.allclose(low_pass_filter(e, 5).pos, e.pos, atol=1e-10)

    def test_white_noise_reduction(self):
        s = 0.3
        noise = np.random.default_rng(0).normal(scale=s, size=(10_004, 1, 3))
        out = low_pass_filter(synthetic(noise), 5).pos[2:-2]
        assert abs(out.std() / (s / np.sqrt(5)) - 1.0) < 0.15

    @given(st.integers(0, 1000), st.tuples(*[st.floats(-100, 100)] * 3))
    def test_translation_commutes(self, seed, c):
        pos = np.random.default_rng(seed).normal(size=(25, 2, 3)) + np.array([3590.0, 4100.0, 6.0])
        a = low_pass_filter(synthetic(pos + np.array(c)), 5).pos
        b = low_pass_filter(synthetic(pos), 5).pos + np.array(c)
        assert np.max(np.abs(a - b)) < 1e-12

    def test_bad_window(self, rng):
        e = synthetic(rng.normal(size=(10, 1, 3)))
        for w in (0, 4, 11):
            with pytest.raises(DataError):
                low_pass_filter(e, w)


class TestWindows:
    def test_boundary_and_count(self, rng):
        assert len(windowize(synthetic(rng.normal(size=(9, 2, 3))), 8)) == 1
        assert len(windowize(synthetic(rng.normal(size=(300, 2, 3))), 8)) == 292
        with pytest.raises(DataError):
            windowize(synthetic(rng.normal(size=(8, 2, 3))), 8)

    @given(st.integers(9, 60), st.integers(1, 12))
    def test_count_formula(self, T, l):
        if T < l + 1:
            return
        assert len(windowize(synthetic(np.zeros((T, 1, 3))), l)) == T - l

    def test_round_trip_to_km(self, rng):
        raw = np.cumsum(rng.normal(size=(30, 3, 3)), axis=0) + 1000.0
        e = synthetic(raw)
        for s in windowize(e, 8, scale=0.5):
            assert np.allclose(denormalize(s.history, s.norm), raw[s.start:s.start + 8], atol=1e-9)
            assert np.allclose(denormalize(s.target, s.norm), raw[s.start + 8], atol=1e-9)
            assert np.array_equal(s.norm.offset, raw[s.start + 7])

    def test_stack(self, rng):
        h, t = stack_windows(windowize(synthetic(rng.normal(size=(12, 2, 3))), 8))
        assert h.shape == (4, 8, 2, 3) and t.shape == (4, 2, 3)

    def test_stride(self, rng):
        w = windowize(synthetic(rng.normal(size=(40, 1, 3))), 8, stride=5)
        assert [s.start for s in w] == [0, 5, 10, 15, 20, 25, 30]


class TestNormalize:
    @given(st.integers(0, 1000), st.floats(0.1, 10.0))
    def test_inverse_and_last_row(self, seed, scale):
        raw = np.random.default_rng(seed).normal(scale=1000.0, size=(8, 3, 3))
        hist, norm = normalize_window(raw, scale)
        assert np.array_equal(hist[-1], np.zeros((3, 3)))
        assert np.max(np.abs(denormalize(hist, norm) - raw)) <= 1e-12 * max(1.0, np.abs(raw).max())

    def test_stationary_fighter(self):
        raw = np.broadcast_to(np.array([3590.0, 4100.0, 6.0]), (8, 1, 3))
        assert np.array_equal(normalize_window(raw)[0], np.zeros((8, 1, 3)))

    def test_bad_scale(self):
        with pytest.raises(DataError):
            normalize_window(np.zeros((8, 1, 3)), 0.0)


class TestSplit:
    @pytest.mark.parametrize("N,train,test", [(30, 24, 6), (5, 4, 1), (2, 1, 1), (7, 6, 1)])
    def test_sizes(self, N, train, test):
        es = [synthetic(np.zeros((9, 1, 3)), eid=f"e{k}") for k in range(N)]
        sp = split_dataset(es, 0)
        assert (len(sp.train), len(sp.test)) == (train, test)

    @given(st.integers(2, 40), st.integers(0, 100))
    def test_partition(self, N, seed):
        es = [synthetic(np.zeros((9, 1, 3)), eid=f"e{k}") for k in range(N)]
        sp = split_dataset(es, seed)
        tr, te = {e.id for e in sp.train}, {e.id for e in sp.test}
        assert not tr & te and tr | te == {e.id for e in es}
        assert [e.id for e in split_dataset(es, seed).test] == [e.id for e in sp.test]


class TestCsv:
    def test_columns(self):
        assert list(CSV_COLUMNS) == ["scenario_id", "t_s", "fighter_id", "team", "x_km", "y_km", "z_km",
                               "roll_rad", "pitch_rad", "yaw_rad", "speed_kms"]

    def test_write_read_write_bytes(self, tmp_path):
        e = generate_engagement(GeneratorSpec(2, 1, duration_s=20, seed=5, noise_sigma=0.01, id="x"))
        write_csv(e, tmp_path / "a.csv")
        back = read_csv(tmp_path / "a.csv")
        write_csv(back, tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert np.array_equal(back.pos, e.pos) and np.array_equal(back.att, e.att)
        assert (back.blue, back.red, back.sample_rate_hz) == (2, 1, 2.0)

    def test_missing_column_named(self):
        text = engagement_to_csv(synthetic(np.zeros((10, 1, 3))))
        lines = [",".join(c for k, c in enumerate(r.split(",")) if k != 5) for r in text.splitlines()]
        with pytest.raises(DataError, match="y_km"):
            engagement_from_csv("\n".join(lines) + "\n")

    def test_non_uniform_timestamps_rejected(self):
        text = engagement_to_csv(synthetic(np.zeros((10, 1, 3))))
        rows = text.splitlines()
        rows[4] = rows[4].replace("1.5,", "1.6,", 1)
        with pytest.raises(DataError):
            engagement_from_csv("\n".join(rows) + "\n")

    def test_bad_number_reports_line(self):
        rows = engagement_to_csv(synthetic(np.zeros((10, 1, 3)))).splitlines()
        rows[3] = rows[3].replace("0.0", "abc", 1)
        with pytest.raises(DataError, match="line 4"):
            engagement_from_csv("\n".join(rows) + "\n")

    def test_read_dir_sorted(self, tmp_path):
        for name in ("b", "a"):
            write_csv(synthetic(np.zeros((9, 1, 3)), eid=name), tmp_path / f"{name}.csv")
        assert [e.id for e in read_dir(tmp_path)] == ["a", "b"]

    def test_engagement_shape_validation(self):
        with pytest.raises(DataError):
            Engagement("x", 1, 0, 2.0, np.arange(3) / 2.0, np.zeros((3, 2, 3)), np.zeros((3, 2, 3)), np.zeros((3, 2)))
