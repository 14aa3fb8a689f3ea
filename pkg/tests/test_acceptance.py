"""End-to-end acceptance checks, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists
PASS/FAIL per criterion together with the measured values.
"""

import json
import time

import numpy as np
import pytest
from threadpoolctl import threadpool_limits

from muller.bench import time_resizers
from muller.cli import main
from muller.core import MullerParams, muller_flops, muller_forward, muller_forward_linear_form, preset
from muller.data import make_texture_dataset
from muller.filtering import gaussian_kernel, separable_convolve
from muller.gradients import run_gradcheck
from muller.image import fixture_image, image_stats
from muller.nn import ToyClassifier
from muller.resize import ResizeSpec, resize_bilinear
from muller.train import TrainConfig, train_joint

from oracles import conv2d_replicate, gaussian_taps

DETAIL_GOLDEN = 17.34819518264548
TRAIN_SEEDS = (0, 1, 2)


@pytest.fixture(autouse=True)
def single_thread():
    with threadpool_limits(1):
        yield


def detail_ratio():
    img = fixture_image()
    z = muller_forward(img, preset("resnet50", antialias=True), 224, 224)
    return image_stats(z).high_freq_energy / image_stats(resize_bilinear(img, 224, 224)).high_freq_energy


def training_experiment():
    runs = []
    for seed in TRAIN_SEEDS:
        ds = make_texture_dataset(seed, 2000)
        cfg = TrainConfig(seed=seed, out_h=16, out_w=16)
        model0 = ToyClassifier.init(256, 32, 4, seed=seed)
        joint = train_joint(ds, MullerParams.zeros(2), model0, cfg)
        control = train_joint(ds, MullerParams.zeros(2), model0, TrainConfig(seed=seed, train_resizer=False))
        runs.append({"joint": joint[2], "control": control[2], "params": joint[0]})
    return runs


@pytest.fixture(scope="module")
def experiment():
    t0 = time.perf_counter()
    with threadpool_limits(1):
        runs = training_experiment()
    return runs, time.perf_counter() - t0


@pytest.mark.criterion(1, "zero parameters reduce to bilinear bit-exactly")
def test_reduction_identity(record_property):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    for _ in range(50):
        h, w, c = rng.integers(2, 40, size=2).tolist() + [int(rng.choice([1, 3]))]
        oh, ow = rng.integers(1, 40, size=2).tolist()
        img = rng.random((h, w, c))
        k = int(rng.integers(1, 5))
        for nl in ("tanh", "identity"):
            out = muller_forward(img, MullerParams.zeros(k, nonlinearity=nl), oh, ow)
            assert np.array_equal(out, resize_bilinear(img, oh, ow))
    elapsed = time.perf_counter() - t0
    record_property("seconds", f"{elapsed:.2f}")
    assert elapsed < 5


@pytest.mark.criterion(2, "linear Laplacian form agrees within 1e-10")
def test_linear_form_equivalence(record_property):
    rng = np.random.default_rng(2)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(50):
        k = int(rng.integers(1, 4))
        img = rng.random((16, 16, 3))
        p = MullerParams(alpha=rng.normal(0, 3, k), beta=rng.normal(0, 0.5, k), nonlinearity="identity")
        oh, ow = rng.integers(1, 17, size=2).tolist()
        worst = max(worst, np.max(np.abs(muller_forward(img, p, oh, ow) - muller_forward_linear_form(img, p, oh, ow))))
    elapsed = time.perf_counter() - t0
    record_property("max_abs_diff", f"{worst:.2e}")
    record_property("seconds", f"{elapsed:.2f}")
    assert worst < 1e-10 and elapsed < 10


@pytest.mark.criterion(3, "analytic gradients match finite differences")
def test_gradient_oracle(record_property):
    t0 = time.perf_counter()
    params_worst = max(c.worst for c in run_gradcheck(n_instances=20, seed=0))
    input_cases = run_gradcheck(n_instances=20, seed=0, size=8, with_input=True)
    input_worst = max(c.errors["input"] for c in input_cases)
    input_params_worst = max(max(v for n, v in c.errors.items() if n != "input") for c in input_cases)
    elapsed = time.perf_counter() - t0
    record_property("param_rel_err", f"{max(params_worst, input_params_worst):.2e}")
    record_property("input_rel_err", f"{input_worst:.2e}")
    record_property("seconds", f"{elapsed:.1f}")
    assert params_worst < 1e-6 and input_params_worst < 1e-6
    assert input_worst < 1e-5
    assert elapsed < 60


@pytest.mark.criterion(4, "Gaussian kernels normalized; separable conv equals 2D oracle")
def test_filter_correctness(record_property):
    worst_sum = max(abs(gaussian_kernel(ks, sd).taps.sum() - 1.0) for ks in (3, 5, 7) for sd in (1.0, 1.5, 2.0))
    rng = np.random.default_rng(4)
    worst_conv = 0.0
    for ks in (3, 5, 7):
        for sd in (1.0, 1.5, 2.0):
            img = rng.random((12, 12, 3))
            ref = conv2d_replicate(img, gaussian_taps(ks, sd))
            worst_conv = max(worst_conv, np.max(np.abs(separable_convolve(img, gaussian_kernel(ks, sd)) - ref)))
    record_property("sum_err", f"{worst_sum:.1e}")
    record_property("conv_err", f"{worst_conv:.1e}")
    assert worst_sum < 1e-12 and worst_conv < 1e-12


@pytest.mark.criterion(5, "preset command reproduces the six learned tuples")
def test_preset_fidelity(capsys):
    expected = {
        ("effnet_b0", True): (1.715, 0.088, -8.41, 0.001),
        ("mobilenet_v2", True): (1.480, 0.174, -5.25, -0.058),
        ("resnet50", True): (1.892, -0.014, -11.295, 0.003),
        ("effnet_b0", False): (1.632, -0.014, -7.265, 0.026),
        ("mobilenet_v2", False): (1.792, 0.269, -7.514, -0.077),
        ("resnet50", False): (1.687, -0.039, -12.637, 0.015),
    }
    assert main(["presets", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    got = {
        (r["name"], r["antialias"]): tuple(v for layer in r["layers"] for v in (layer["alpha"], layer["beta"]))
        for r in rows
    }
    assert got == expected


@pytest.mark.criterion(6, "resnet50 preset boosts detail on the natural image")
def test_detail_boost(record_property):
    ratio = detail_ratio()
    record_property("hf_ratio", f"{ratio:.4f}")
    assert ratio > 1.0
    assert ratio == pytest.approx(DETAIL_GOLDEN, rel=0.05)


@pytest.mark.criterion(7, "FLOPs within 2x of 0.03 GFLOPs; k=3 has 4 resizes and 3 filters")
def test_flops_calibration(record_property):
    spec = ResizeSpec(512, 512, 224, 224)
    r2 = muller_flops(spec, MullerParams.zeros(2))
    r3 = muller_flops(spec, MullerParams.zeros(3))
    record_property("gflops_k2", f"{r2.total / 1e9:.4f}")
    assert 0.015e9 <= r2.total <= 0.06e9
    assert (r3.n_resizes, r3.n_filters) == (4, 3)


@pytest.mark.criterion(8, "joint training: loss falls, beats control, alpha_1 moves")
def test_joint_training(experiment, record_property):
    runs, elapsed = experiment
    joint_acc = np.mean([r["joint"][-1]["val_accuracy"] for r in runs])
    control_acc = np.mean([r["control"][-1]["val_accuracy"] for r in runs])
    alpha_moves = [abs(r["params"].alpha[0]) for r in runs]
    record_property("joint_val_acc", f"{joint_acc:.3f}")
    record_property("control_val_acc", f"{control_acc:.3f}")
    record_property("min_abs_alpha1", f"{min(alpha_moves):.3f}")
    record_property("seconds", f"{elapsed:.1f}")
    for r in runs:
        assert r["joint"][-1]["loss"] < r["joint"][0]["loss"]
    assert joint_acc >= control_acc
    assert min(alpha_moves) > 0.05
    assert elapsed < 600


@pytest.mark.criterion(9, "full resizer within 10x of plain bilinear wall time")
def test_performance_envelope(record_property):
    result = time_resizers(fixture_image(), preset("resnet50"), 224, 224, reps=20)
    record_property("ratio", f"{result['overhead_ratio']:.2f}")
    record_property("muller_ms", f"{result['muller']['median_ms']:.1f}")
    record_property("bilinear_ms", f"{result['bilinear']['median_ms']:.1f}")
    assert result["overhead_ratio"] <= 10.0


@pytest.mark.criterion(10, "detail boost and training repeat bit-identically")
def test_determinism(experiment):
    assert detail_ratio() == DETAIL_GOLDEN
    img = fixture_image()
    p = preset("resnet50")
    assert np.array_equal(muller_forward(img, p, 224, 224), muller_forward(img, p, 224, 224))
    first, _ = experiment
    second = training_experiment()
    for a, b in zip(first, second):
        assert a["joint"] == b["joint"] and a["control"] == b["control"] and a["params"] == b["params"]
