import time
from dataclasses import dataclass, field

import numpy as np
import pytest

import observer
from errors import EmptyCollection, InconsistentMeasurements
from graph import create_graph, route_after_contract
from observer import STAGE_TIMINGS, iterate_run, observer_step, run
from services.benchmarks import initial_state, simulate_truth
from services.dynamics import SystemModel
from services.interval import (
    Box,
    BoxCollection,
    Interval,
    add,
    div,
    intersect,
    mul,
    scale,
    scale_arrays,
    sub,
)
from state import ObserverConfig


@dataclass(frozen=True, eq=False)
class ScalarLinearModel(SystemModel):
    """x+ = a x + w, y = x + v in one dimension."""
    a: float
    W: Box
    V: Box
    X0: Box
    n: int = 1
    m: int = 0
    C: np.ndarray = field(default_factory=lambda: np.array([[1.0]]))

    def f(self, x, u, w):
        return self.a * np.asarray(x) + np.asarray(w)

    def f_enclosure(self, xlo, xhi, u, wlo, whi, rigorous=False):
        lo, hi = scale_arrays(self.a, xlo, xhi, rigorous)
        return lo + wlo, hi + whi

    def jac_enclosure_arrays(self, xlo, xhi, u, wlo, whi, rigorous=False):
        jac = np.broadcast_to(np.array([[self.a, 1.0]]), (xlo.shape[0], 1, 2)).copy()
        return jac, jac.copy()


def single_set_observer(model, cfg, inputs, measurements):
    """Classical interval observer written box by box with scalar interval operations."""

    def contract(components, y):
        for _ in range(cfg.I_max):
            before = list(components)
            for i in range(model.p):
                row = model.C[i]
                nonzero = [j for j in range(model.n) if row[j] != 0.0]
                for j in nonzero:
                    s = None
                    for l in nonzero:
                        if l == j:
                            continue
                        term = scale(row[l], components[l])
                        s = term if s is None else add(s, term)
                    b = sub(Interval.point(y[i]), Interval(model.V.lo[i], model.V.hi[i]))
                    if s is not None:
                        b = sub(b, s)
                    components[j] = intersect(components[j], div(b, Interval.point(row[j])))
                    if components[j].is_empty:
                        return None
            if components == before:
                break
        return components

    def predict(components, u):
        lo = np.array([c.lo for c in components])
        hi = np.array([c.hi for c in components])
        cx = (lo + hi) / 2.0
        cw = (model.W.lo + model.W.hi) / 2.0
        flo, fhi = model.f_enclosure(cx[None, :], cx[None, :], model._inputs(u),
                                     cw[None, :], cw[None, :])
        J = model.jac_enclosure(Box(lo, hi), u, model.W)
        deltas = [sub(c, Interval.point(m)) for c, m in zip(components, cx)]
        deltas += [sub(Interval(wl, wh), Interval.point(m))
                   for wl, wh, m in zip(model.W.lo, model.W.hi, cw)]
        live = [j for j in range(2 * model.n) if np.any(J.lo[:, j]) or np.any(J.hi[:, j])]
        result = []
        for i in range(model.n):
            acc = None
            for j in live:
                term = mul(J[i, j], deltas[j])
                acc = term if acc is None else add(acc, term)
            result.append(add(Interval(flo[0, i], fhi[0, i]), acc))
        return result

    components = contract(model.X0.components, measurements[0])
    boxes = [Box.from_intervals(components)]
    for k in range(len(measurements) - 1):
        components = contract(predict(components, inputs[k]), measurements[k + 1])
        boxes.append(Box.from_intervals(components))
    return boxes


def fast(M_max, **kwargs):
    return ObserverConfig(M_max=M_max, rounding="fast", **kwargs)


def rigorous(M_max, **kwargs):
    return ObserverConfig(M_max=M_max, rounding="rigorous", **kwargs)


class TestObserverStep:
    def test_step_keeps_the_true_state(self, vdp):
        truth = simulate_truth(vdp, np.zeros(2), None, 1, seed=0)
        cfg = rigorous(20)
        X0 = run(vdp, cfg, truth.inputs[:0], truth.measurements[:1])[0]
        X1 = observer_step(X0, vdp, truth.inputs[0], truth.measurements[1], cfg)
        assert 1 <= len(X1) <= 20
        assert X1.contains_point(truth.states[1])

    def test_empty_collection(self, vdp):
        with pytest.raises(EmptyCollection):
            observer_step(BoxCollection.empty(2), vdp, np.zeros(0), [0.0], fast(5))

    def test_inconsistent_measurement(self, vdp):
        with pytest.raises(InconsistentMeasurements):
            observer_step(BoxCollection.from_boxes([Box.unit(2)]), vdp, np.zeros(0), [50.0], fast(5))

    def test_exact_measurements_collapse_to_points(self):
        model = ScalarLinearModel(a=0.9, W=Box.point([0.0]), V=Box.point([0.0]), X0=Box.unit(1, 5.0))
        xs = [2.0]
        for _ in range(5):
            xs.append(0.9 * xs[-1])
        collections = run(model, fast(1), None, np.array(xs)[:, None])
        for k, collection in enumerate(collections):
            assert len(collection) == 1
            assert collection[0].width()[0] == 0.0
            assert collection[0].contains_point([xs[k]])


class TestRun:
    def test_zero_horizon(self, vdp):
        collections = run(vdp, fast(10), None, np.array([[0.1]]))
        assert len(collections) == 1
        box = collections[0][0]
        assert box.lo == pytest.approx([-0.1, -1.0])
        assert box.hi == pytest.approx([0.3, 1.0])

    def test_returns_all_collections(self, vdp):
        truth = simulate_truth(vdp, np.zeros(2), None, 5, seed=2)
        collections = run(vdp, fast(8), truth.inputs, truth.measurements)
        assert len(collections) == 6
        assert all(1 <= len(c) <= 8 for c in collections)

    def test_inconsistent_initial_measurement(self, vdp):
        with pytest.raises(InconsistentMeasurements) as info:
            run(vdp, fast(5), None, np.array([[5.0]]))
        assert info.value.step == 0

    def test_failing_step_index_is_reported(self, vdp):
        with pytest.raises(InconsistentMeasurements) as info:
            run(vdp, fast(5), None, np.array([[0.0], [0.0], [50.0]]))
        assert info.value.step == 2
        assert "(step 2)" in str(info.value)

    def test_iterate_run_yields_timings(self, vdp):
        truth = simulate_truth(vdp, np.zeros(2), None, 3, seed=0)
        steps = list(iterate_run(vdp, fast(4), truth.inputs, truth.measurements))
        assert [k for k, _, _ in steps] == [0, 1, 2, 3]
        assert steps[0][2] == 0.0
        assert all(ms > 0.0 for _, _, ms in steps[1:])

    def test_step_reports_stage_stats(self, vdp):
        truth = simulate_truth(vdp, np.zeros(2), None, 1, seed=0)
        X0 = run(vdp, fast(6), truth.inputs[:0], truth.measurements[:1])[0]
        stats = {}
        observer_step(X0, vdp, truth.inputs[0], truth.measurements[1], fast(6), stats=stats)
        assert set(STAGE_TIMINGS) <= set(stats)
        assert all(stats[name] >= 0.0 for name in STAGE_TIMINGS)
        assert stats["splits"] == 6 - len(X0)
        assert {"discarded", "pruned"} <= set(stats)

    def test_step_time_counts_only_the_stages(self, vdp, monkeypatch):
        class SlowGraph:
            def invoke(self, state):
                time.sleep(0.05)
                stage_ms = dict(zip(STAGE_TIMINGS, [1.0, 2.0, 3.0, 4.0]))
                return {"collection": state["collection"], "stats": {"splits": 0, **stage_ms}}

        monkeypatch.setattr(observer, "get_step_graph", lambda: SlowGraph())
        truth = simulate_truth(vdp, np.zeros(2), None, 2, seed=0)
        steps = list(iterate_run(vdp, fast(4), truth.inputs, truth.measurements))
        assert [ms for _, _, ms in steps] == [0.0, 10.0, 10.0]

    @pytest.mark.parametrize("seed", range(3))
    def test_vdp_runs_are_sound(self, vdp, seed):
        truth = simulate_truth(vdp, initial_state(vdp, "corner"), None, 30, seed)
        for k, collection in enumerate(run(vdp, rigorous(30), truth.inputs, truth.measurements)):
            assert collection.contains_point(truth.states[k]), f"step {k}"

    def test_tank_run_is_sound(self, tank5):
        truth = simulate_truth(tank5, initial_state(tank5), None, 15, seed=4)
        for k, collection in enumerate(run(tank5, rigorous(10), truth.inputs, truth.measurements)):
            assert collection.contains_point(truth.states[k]), f"step {k}"


class TestSingleSetEquivalence:
    @pytest.mark.parametrize("seed", range(10))
    def test_vdp_matches_classical_observer(self, vdp, seed):
        truth = simulate_truth(vdp, np.zeros(2), None, 25, seed)
        expected = single_set_observer(vdp, fast(1), truth.inputs, truth.measurements)
        collections = run(vdp, fast(1), truth.inputs, truth.measurements)
        assert len(collections) == len(expected)
        for collection, box in zip(collections, expected):
            assert len(collection) == 1
            assert collection[0] == box

    def test_tank_matches_classical_observer(self, tank5):
        truth = simulate_truth(tank5, initial_state(tank5), None, 20, seed=5)
        expected = single_set_observer(tank5, fast(1), truth.inputs, truth.measurements)
        collections = run(tank5, fast(1), truth.inputs, truth.measurements)
        for collection, box in zip(collections, expected):
            assert collection[0] == box


class TestGraph:
    def test_graph_has_the_four_stages(self):
        nodes = set(create_graph().get_graph().nodes)
        assert {"refine", "predict", "contract", "prune"} <= nodes

    def test_routing_after_contraction(self):
        assert route_after_contract({"collection": BoxCollection.empty(2)}) == "end"
        assert route_after_contract({"collection": BoxCollection([[0, 0]], [[1, 1]])}) == "prune"
