"""Smoke test for the stdw_py extension module.

Build and install first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/stdw_py-*.whl
"""

import json
import math
import os
import tempfile

import stdw_py


def check_schedules():
    assert stdw_py.pair_plan(3, 4, 6) == [(1, 1), (2, 2), (3, 3), (1, 1), (2, 2), (3, 3)]
    assert stdw_py.rho_schedule("equal", 4) == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert stdw_py.rho_schedule("fixed", 2, fixed_value=0.3) == [0.3, 0.3, 0.3]
    rs = stdw_py.rho_schedule("sorted", 6, seed=9)
    assert rs == sorted(rs)


def check_model():
    model = stdw_py.Model([2, 8], 2, seed=3)
    assert model.param_count() == 2 * 8 + 8 + 8 * 2 + 2
    logits = model.forward([[0.1, -0.2], [1.0, 0.5]])
    assert len(logits) == 2 and len(logits[0]) == 2
    again = stdw_py.Model.from_bytes(model.to_bytes())
    assert again == model
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "m.bin")
        model.save(path)
        assert stdw_py.Model.load(path).params() == model.params()


def check_adaptation():
    seq = stdw_py.rotating_moons(4, 0.0, 30.0, samples_per_domain=100, seed=2)
    assert len(seq) == 4 and seq.dim == 2 and seq.class_count == 2
    assert all(y is None for y in seq.labels(1))
    model, trace = stdw_py.adapt("stdw", seq, steps=2, epochs=1, pretrain_epochs=10,
                                 batch_size=32, hidden=[16])
    assert len(trace.domain_accuracy) == 4
    assert set(trace.rhos) == {0.0, 0.5, 1.0}
    acc, err = stdw_py.evaluate_domain(model, seq, seq.n)
    assert acc == trace.target_accuracy and math.isclose(acc + err, 1.0)
    _, gst = stdw_py.adapt("gst", seq, epochs=1, pretrain_epochs=10, hidden=[16])
    assert gst.method == "gst"


def check_lyapunov():
    violations, v = stdw_py.lyapunov_check(4, 0.5, 2.0, 0.2, 100, 7)
    assert violations == 0 and v[-1] < v[0]


def check_errors():
    for call in (
        lambda: stdw_py.rho_schedule("bogus", 3),
        lambda: stdw_py.pair_plan(0, 2, 3),
        lambda: stdw_py.adapt("tent", stdw_py.rotating_moons(2, 0.0, 10.0)),
    ):
        try:
            call()
        except ValueError:
            continue
        raise AssertionError("expected ValueError")


def check_experiment():
    with tempfile.TemporaryDirectory() as d:
        text = f"""
method = "gst"
repeats = 2
out = "{d}"
[dataset]
kind = "moons"
n_domains = 3
angle_end = 20.0
samples_per_domain = 60
[adapt]
epochs = 1
pretrain_epochs = 5
hidden = [8]
"""
        report = json.loads(stdw_py.run_experiment(text))
        assert len(report["repeats"]) == 2
        assert sorted(os.listdir(d)) == ["accuracy.csv", "report.json", "trace.csv"]


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("check_"):
            fn()
            print(f"ok  {name[6:]}")
    print("python smoke test passed")
