"""Acceptance gate: one test per release criterion.

Run with -v to get one pass/fail line per criterion. Every tolerance and
time budget is stated inline next to its assert. Four checks depend on
datasets we do not redistribute; they skip with instructions unless the
matching environment variable points at a local copy:

    MDP_PIMA_CSV   diabetes CSV (Pregnancies..Age columns plus Outcome)
    MDP_HEART_CSV  heart disease CSV (age..thal columns plus target)
    MDP_LUNG_DIR   histopathology root with lung_n/lung_aca/lung_scc folders
    MDP_BRAIN_DIR  MRI root with yes/no folders

The published accuracies these datasets are known for (91.0 diabetes,
98.53 heart, 89.0 lung and brain) come without split seeds or
preprocessing detail, so the checks assert conservative floors and print
the published number alongside the measured one for comparison.
"""

import os
import struct
import time
from fractions import Fraction

import numpy as np
import pytest
from fastapi.testclient import TestClient

from medpredict import persistence
from medpredict.cli import main
from medpredict.ensemble import (
    TreeConfig,
    best_split,
    fit_adaboost,
    fit_bagging,
    fit_forest,
    fit_logistic,
    fit_tree,
    predict_batch,
    predict_tree,
)
from medpredict.metrics import ConfusionMatrix, report
from medpredict.neuralnet import (
    Conv2D,
    Dense,
    Flatten,
    MaxPool2D,
    ReLU,
    SGDConfig,
    SequentialNet,
    Softmax,
    build_lung_cnn,
    build_vgg16,
    conv2d_backward,
    conv2d_forward,
    dropout_forward,
    maxpool2d_backward,
    maxpool2d_forward,
    predict_proba,
    softmax_cross_entropy,
    train,
)
from medpredict.pipelines import HEART_FEATURES, PIMA_FEATURES, PipelineSettings, train_disease
from medpredict.service import create_app
from medpredict.service.predictor import predict_image, predict_tabular
from medpredict.tabular import ColumnSchema, Dataset, ScalerParams, train_test_split

from test_cli import write_pima_csv
from test_ensemble import oracle_best_split
from test_neuralnet import check_param_gradients, fd_close, solid_color_dataset

# ------------------------------------------------------------ criterion 1


def test_c01_best_split_equals_bruteforce_oracle_on_500_datasets():
    """best_split agrees with an independent enumeration of every
    feature/midpoint pair on 500 random datasets (n <= 12, p <= 4,
    K <= 3). Thresholds and split choice exact, impurity decrease within
    1e-12. Budget: 10 s."""
    start = time.perf_counter()
    rng = np.random.default_rng(501)
    for trial in range(500):
        n = int(rng.integers(2, 13))
        p = int(rng.integers(1, 5))
        k = int(rng.integers(2, 4))
        if trial % 3 == 0:
            X = rng.uniform(-2, 2, size=(n, p))
        else:
            X = rng.integers(0, 5, size=(n, p)).astype(float)  # heavy ties
        y = rng.integers(0, k, size=n)
        got = best_split(X, y, list(range(p)), n_classes=k)
        want = oracle_best_split(X.tolist(), y.tolist(), range(p), k)
        if want is None:
            assert got is None, f"trial {trial}: impl split where oracle found none"
        else:
            assert got is not None, f"trial {trial}: no impl split where oracle found one"
            assert (got.feature, got.threshold) == (want[0], want[1]), f"trial {trial}"
            assert abs(got.impurity_decrease - want[2]) <= 1e-12, f"trial {trial}"
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.1f}s, budget 10s"
    print(f"criterion 1 PASS: 500 datasets matched the brute-force oracle in {elapsed:.2f}s")


# ------------------------------------------------------------ criterion 2


def _fd_input_grad(loss, x, analytic, h=1e-5):
    flat, gflat = x.ravel(), analytic.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = loss()
        flat[i] = orig - h
        down = loss()
        flat[i] = orig
        fd_close(gflat[i], (up - down) / (2 * h))


def test_c02_every_layer_gradient_matches_finite_differences_50_seeds():
    """Central finite differences vs analytic gradients for conv2d,
    maxpool, relu, dense, dropout-eval and softmax cross-entropy, plus a
    composed two-layer net, across 50 random seeds. Relative error below
    1e-4 (absolute floor 1e-6 where the gradient is zero). Budget: 60 s."""
    start = time.perf_counter()
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)

        # conv2d: weight, bias and input gradients
        x = rng.normal(size=(1, 4, 4, 2))
        w = rng.normal(size=(3, 3, 2, 2))
        b = rng.normal(size=2)
        pad = "same" if seed % 2 else "valid"
        up_shape = conv2d_forward(x, w, b, padding=pad)[0].shape
        upstream = rng.normal(size=up_shape)

        def conv_loss():
            return float((conv2d_forward(x, w, b, padding=pad)[0] * upstream).sum())

        _, cache = conv2d_forward(x, w, b, padding=pad)
        gx, gw, gb = conv2d_backward(upstream, w, cache)
        _fd_input_grad(conv_loss, w, gw)
        _fd_input_grad(conv_loss, b, gb)
        _fd_input_grad(conv_loss, x, gx)

        # maxpool: distinct values with gaps far above h keep argmax stable
        xp = rng.permutation(np.arange(16, dtype=float)).reshape(1, 4, 4, 1) / 3.0
        upool = rng.normal(size=(1, 2, 2, 1))
        _, arg = maxpool2d_forward(xp, 2, 2)
        gxp = maxpool2d_backward(upool, arg, xp.shape, 2, 2)
        _fd_input_grad(lambda: float((maxpool2d_forward(xp, 2, 2)[0] * upool).sum()), xp, gxp)

        # relu, with inputs held away from the kink at 0
        xr = rng.uniform(0.05, 1.0, size=(2, 6)) * rng.choice([-1.0, 1.0], size=(2, 6))
        ur = rng.normal(size=(2, 6))
        relu = ReLU()
        relu.forward(xr, train=True)
        gxr = relu.backward(ur)

        def relu_loss():
            return float((relu.forward(xr, train=True) * ur).sum())

        _fd_input_grad(relu_loss, xr, gxr)

        # dense: weight, bias and input gradients
        dense = Dense(4, 3, rng=rng)
        xd = rng.normal(size=(3, 4))
        ud = rng.normal(size=(3, 3))
        dense.forward(xd, train=True)
        gxd = dense.backward(ud)

        def dense_loss():
            return float((dense.forward(xd, train=True) * ud).sum())

        _fd_input_grad(dense_loss, dense.weights, dense.grad_weights)
        _fd_input_grad(dense_loss, dense.bias, dense.grad_bias)
        _fd_input_grad(dense_loss, xd, gxd)

        # dropout in eval mode is the identity, so the gradient is the
        # upstream signal itself
        xo = rng.normal(size=(2, 5))
        uo = rng.normal(size=(2, 5))
        _fd_input_grad(
            lambda: float((dropout_forward(xo, 0.5, "eval", rng)[0] * uo).sum()), xo, uo.copy()
        )

        # softmax cross-entropy on the loss itself
        logits = rng.normal(size=(3, 4))
        targets = np.eye(4)[rng.integers(0, 4, size=3)]
        _, grad = softmax_cross_entropy(logits, targets)
        _fd_input_grad(lambda: softmax_cross_entropy(logits, targets)[0], logits, grad)

        # composed two-layer net end to end through the fused loss
        net = SequentialNet([Dense(6, 5, rng=rng), ReLU(), Dense(5, 3, rng=rng)])
        Xn = rng.normal(size=(3, 6))
        Yn = np.eye(3)[rng.integers(0, 3, size=3)]
        check_param_gradients(net, Xn, Yn)

    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"took {elapsed:.1f}s, budget 60s"
    print(f"criterion 2 PASS: 50 seeds x 7 gradient checks in {elapsed:.2f}s")


# ------------------------------------------------------------ criterion 3


def test_c03_lung_cnn_overfits_12_solid_color_images():
    """The 32x32 sequential CNN reaches 100% training accuracy on 12
    synthetic solid-color images within 200 epochs at a fixed seed.
    Budget: 120 s."""
    start = time.perf_counter()
    X, Y = solid_color_dataset(size=32, per_class=4, seed=0)
    assert X.shape[0] == 12
    net = build_lung_cnn((32, 32), seed=1)
    truth = Y.argmax(axis=1)
    epochs_used = 0
    accuracy = 0.0
    while epochs_used < 200:
        train(net, X, Y, SGDConfig(learning_rate=0.01, batch_size=4, epochs=10, seed=100 + epochs_used))
        epochs_used += 10
        accuracy = float((predict_proba(net, X, batch_size=6).argmax(axis=1) == truth).mean())
        if accuracy == 1.0:
            break
    elapsed = time.perf_counter() - start
    assert accuracy == 1.0, f"train accuracy {accuracy} after {epochs_used} epochs"
    assert elapsed < 120.0, f"took {elapsed:.1f}s, budget 120s"
    print(f"criterion 3 PASS: 100% train accuracy after {epochs_used} epochs in {elapsed:.1f}s")


# ------------------------------------------------------------ criterion 4


def test_c04_vgg16_shape_trace_and_single_forward():
    """build_vgg16 produces the exact trace 224 -> 112 -> 56 -> 28 -> 14
    -> 7 spatially, then 25088 -> 4096 -> 4096 -> K through the dense
    head, and one forward pass completes. Budget: 30 s. Training this
    network at published scale is out of reach here; this structural
    check plus the dataset-conditional training checks stand in."""
    start = time.perf_counter()
    net = build_vgg16(n_classes=2, seed=0)
    assert net.input_shape == (224, 224, 3)

    denses = [l for l in net.layers if isinstance(l, Dense)]
    assert [d.weights.shape for d in denses] == [(25088, 4096), (4096, 4096), (4096, 2)]
    assert sum(isinstance(l, Conv2D) for l in net.layers) == 13
    assert isinstance(net.layers[-1], Softmax)

    x = np.random.default_rng(40).normal(size=(1, 224, 224, 3)) * 0.1
    spatial = [x.shape[1]]
    for layer in net.layers:
        x = layer.forward(x, False)
        if isinstance(layer, MaxPool2D):
            spatial.append(x.shape[1])
        if isinstance(layer, Flatten):
            assert x.shape == (1, 25088)
    assert spatial == [224, 112, 56, 28, 14, 7]
    assert x.shape == (1, 2)
    assert np.all(np.isfinite(x))
    np.testing.assert_allclose(x.sum(axis=1), 1.0, atol=1e-9)

    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"took {elapsed:.1f}s, budget 30s"
    print(f"criterion 4 PASS: trace 224-112-56-28-14-7 / 25088-4096-4096-2 in {elapsed:.1f}s")


# ------------------------------------------------------------ criterion 5


def _dataset_env(var: str, hint: str) -> str:
    path = os.environ.get(var, "")
    if not path:
        pytest.skip(f"set {var} to {hint} to run this check")
    if not os.path.exists(path):
        pytest.skip(f"{var}={path} does not exist")
    return path


def test_c05a_diabetes_random_forest_floor_on_real_data():
    """With the real diabetes CSV, defaults and seed 42, the random
    forest test accuracy is at least 0.72. The published figure is 91.0;
    it ships without split or preprocessing detail, so the floor is
    asserted and the published number printed alongside. Budget: 120 s."""
    path = _dataset_env("MDP_PIMA_CSV", "the diabetes CSV (floor 0.72, published 91.0)")
    start = time.perf_counter()
    result = train_disease("diabetes", path, PipelineSettings())
    elapsed = time.perf_counter() - start
    acc = result.test_accuracy
    print(f"criterion 5 diabetes: measured {acc:.4f} vs published 0.910 (floor 0.72), {elapsed:.1f}s")
    assert acc >= 0.72, f"measured {acc:.4f}, floor 0.72 (published: 91.0)"
    assert elapsed < 120.0, f"took {elapsed:.1f}s, budget 120s"


def test_c05b_heart_random_forest_floor_on_real_data():
    """With the real heart disease CSV, defaults and seed 42, the random
    forest test accuracy is at least 0.80. The published 98.53 is likely
    inflated by near-duplicate rows in the circulating CSV, so the floor
    is asserted and the published number printed alongside. Budget: 120 s."""
    path = _dataset_env("MDP_HEART_CSV", "the heart disease CSV (floor 0.80, published 98.53)")
    start = time.perf_counter()
    result = train_disease("heart", path, PipelineSettings())
    elapsed = time.perf_counter() - start
    acc = result.test_accuracy
    print(f"criterion 5 heart: measured {acc:.4f} vs published 0.9853 (floor 0.80), {elapsed:.1f}s")
    assert acc >= 0.80, f"measured {acc:.4f}, floor 0.80 (published: 98.53)"
    assert elapsed < 120.0, f"took {elapsed:.1f}s, budget 120s"


# ------------------------------------------------------------ criterion 6


def test_c06a_lung_desk_scale_training_beats_chance():
    """On a 300-image stratified subsample at 64x64 (3 classes, chance
    0.33), the CNN reaches test accuracy >= 0.60 with seed 42 defaults.
    The published 89.0 needs the full set at full resolution and is
    reported, not asserted. Budget: 600 s."""
    path = _dataset_env("MDP_LUNG_DIR", "the histopathology root (lung_n/lung_aca/lung_scc)")
    start = time.perf_counter()
    result = train_disease("lung", path, PipelineSettings())
    elapsed = time.perf_counter() - start
    acc = result.test_accuracy
    print(f"criterion 6 lung: measured {acc:.4f} vs published 0.890 (floor 0.60, chance 0.33), {elapsed:.0f}s")
    assert acc >= 0.60, f"measured {acc:.4f}, floor 0.60 (published: 89.0, chance: 0.33)"
    assert elapsed < 600.0, f"took {elapsed:.1f}s, budget 600s"


def test_c06b_brain_desk_scale_training_beats_chance():
    """On a 300-image stratified subsample at 64x64 with the substitute
    sequential net (2 classes, chance 0.50), test accuracy >= 0.60 with
    seed 42 defaults. The published 89.0 needs the full-size network and
    is reported, not asserted. Budget: 600 s."""
    path = _dataset_env("MDP_BRAIN_DIR", "the MRI root (yes/no folders)")
    start = time.perf_counter()
    result = train_disease("brain", path, PipelineSettings())
    elapsed = time.perf_counter() - start
    acc = result.test_accuracy
    print(f"criterion 6 brain: measured {acc:.4f} vs published 0.890 (floor 0.60, chance 0.50), {elapsed:.0f}s")
    assert acc >= 0.60, f"measured {acc:.4f}, floor 0.60 (published: 89.0, chance: 0.50)"
    assert elapsed < 600.0, f"took {elapsed:.1f}s, budget 600s"


# ------------------------------------------------------------ criterion 7


def test_c07_metrics_match_hand_computed_rationals():
    """The report on [[2,0],[1,1]] equals the hand-computed rationals
    (2/3, 4/5, ...) within 1e-12, and weighted recall equals accuracy
    within 1e-12 on 100 random confusion matrices."""
    r = report(ConfusionMatrix(np.array([[2, 0], [1, 1]]), ["0", "1"]))
    want = {
        "precision": [Fraction(2, 3), Fraction(1, 1)],
        "recall": [Fraction(1, 1), Fraction(1, 2)],
        "f1": [Fraction(4, 5), Fraction(2, 3)],
    }
    for field, fractions in want.items():
        got = getattr(r, field)
        for k, frac in enumerate(fractions):
            assert abs(got[k] - float(frac)) <= 1e-12, f"{field}[{k}]: {got[k]} vs {frac}"
    assert abs(r.accuracy - 0.75) <= 1e-12
    assert r.support.tolist() == [2, 2]
    assert abs(r.macro_f1 - float((Fraction(4, 5) + Fraction(2, 3)) / 2)) <= 1e-12

    rng = np.random.default_rng(77)
    for trial in range(100):
        k = int(rng.integers(2, 6))
        counts = rng.integers(0, 10, size=(k, k))
        if counts.sum() == 0:
            counts[0, 0] = 1
        rep = report(ConfusionMatrix(counts, [f"c{i}" for i in range(k)]))
        weighted_recall = float((rep.recall * rep.support).sum() / rep.support.sum())
        assert abs(weighted_recall - rep.accuracy) <= 1e-12, f"trial {trial}"
    print("criterion 7 PASS: exact rationals within 1e-12; weighted-recall identity on 100 matrices")


# ------------------------------------------------------------ criterion 8


def _roundtrip_inputs(rng, n_features):
    return rng.uniform(-4.0, 4.0, size=(100, n_features))


def test_c08_determinism_and_persistence(tmp_path, capsys):
    """Three properties: (a) the train command with a fixed seed is
    run-to-run identical, bytes and printed report both; (b) a save/load
    round trip preserves predictions on 100 random inputs for every model
    kind; (c) 1,000 random single-byte corruptions are all detected at
    load time."""
    # (a) run-to-run identical training
    csv = tmp_path / "synthetic.csv"
    write_pima_csv(str(csv))
    out_a, out_b = tmp_path / "a.model", tmp_path / "b.model"
    assert main(["train", "--disease", "diabetes", "--data", str(csv), "--model-out", str(out_a), "--seed", "11"]) == 0
    report_a = capsys.readouterr().out.split("saved")[0]
    assert main(["train", "--disease", "diabetes", "--data", str(csv), "--model-out", str(out_b), "--seed", "11"]) == 0
    report_b = capsys.readouterr().out.split("saved")[0]
    assert report_a == report_b
    assert out_a.read_bytes() == out_b.read_bytes()

    # (b) round trips preserve predictions exactly, per model kind
    rng = np.random.default_rng(5)
    X = rng.normal(size=(60, 4))
    y = (X[:, 0] + X[:, 2] > 0).astype(np.int64)
    schema = persistence.ArtifactSchema([f"f{i}" for i in range(4)], ["a", "b"])
    queries = _roundtrip_inputs(np.random.default_rng(6), 4)

    models = {
        "tree": fit_tree(X, y, TreeConfig(max_depth=6), np.random.default_rng(1), n_classes=2),
        "forest": fit_forest(X, y, TreeConfig(), 7, seed=2, class_names=["a", "b"]),
        "bagging": fit_bagging(X, y, TreeConfig(), 5, seed=2, class_names=["a", "b"]),
        "adaboost": fit_adaboost(X, y, 10, seed=3, class_names=["a", "b"]),
        "logistic": fit_logistic(X, y, 0.5, 200, class_names=["a", "b"]),
    }
    for kind, model in models.items():
        path = str(tmp_path / f"{kind}.model")
        persistence.save(model, schema, None, path)
        loaded = persistence.load(path)
        assert loaded.model_kind == kind
        if kind == "tree":
            before = [predict_tree(model, q) for q in queries]
            after = [predict_tree(loaded.model, q) for q in queries]
            assert before == after, kind
        else:
            _, probs_before = predict_batch(model, queries)
            _, probs_after = predict_batch(loaded.model, queries)
            np.testing.assert_array_equal(probs_before, probs_after), kind

    net = build_lung_cnn((16, 16), seed=4)
    net_schema = persistence.ArtifactSchema([], ["c0", "c1", "c2"], input_kind="image", image_size=(16, 16))
    net_path = str(tmp_path / "net.model")
    persistence.save(net, net_schema, None, net_path)
    images = np.random.default_rng(7).uniform(size=(100, 16, 16, 3))
    np.testing.assert_array_equal(
        predict_proba(net, images, batch_size=25),
        predict_proba(persistence.load(net_path).model, images, batch_size=25),
    )

    # (c) every single-byte corruption is detected
    artifact = out_a.read_bytes()
    corrupt_path = tmp_path / "corrupt.model"
    flip_rng = np.random.default_rng(8)
    detected = 0
    for _ in range(1000):
        pos = int(flip_rng.integers(0, len(artifact)))
        xor = int(flip_rng.integers(1, 256))
        corrupt_path.write_bytes(artifact[:pos] + bytes([artifact[pos] ^ xor]) + artifact[pos + 1 :])
        try:
            persistence.load(str(corrupt_path))
        except persistence.ModelFormatError:
            detected += 1
    assert detected == 1000, f"only {detected}/1000 corruptions detected"
    print("criterion 8 PASS: identical reruns; 6 model kinds round trip on 100 inputs; 1000/1000 corruptions caught")


# ------------------------------------------------------------ criterion 9


def test_c09_split_contract_for_all_n_2_to_200():
    """For every n in [2, 200]: the 80/20 split takes floor(0.8 n) train
    rows, train and test are disjoint, and together they cover all rows.
    Stratified per-class train counts equal an independent counter
    implementing the stated rule: floor(0.8 n_k) per class, leftovers
    handed out one each in class order, cycling while capacity remains."""
    rng = np.random.default_rng(99)
    for n in range(2, 201):
        k = 2 if n < 10 else 2 + n % 3
        labels = rng.integers(0, k, size=n)
        labels[:k] = np.arange(k)  # every class present
        rng.shuffle(labels)
        ds = Dataset([ColumnSchema("x")], np.zeros((n, 1)), labels, [f"c{i}" for i in range(k)])

        for stratified in (True, False):
            split = train_test_split(ds, 0.8, seed=n, stratified=stratified)
            n_train = int(np.floor(0.8 * n + 1e-9))
            assert split.train.n == n_train, f"n={n} stratified={stratified}: floor rule"
            train_set = set(split.train_indices.tolist())
            test_set = set(split.test_indices.tolist())
            assert not train_set & test_set, f"n={n}: overlap"
            assert len(train_set | test_set) == n, f"n={n}: coverage"

        # independent per-class counter for the stratified variant
        split = train_test_split(ds, 0.8, seed=n, stratified=True)
        counts = np.bincount(labels, minlength=k)
        want = [int(np.floor(0.8 * c + 1e-9)) for c in counts]
        leftover = int(np.floor(0.8 * n + 1e-9)) - sum(want)
        c = 0
        while leftover > 0:
            if want[c] < counts[c]:
                want[c] += 1
                leftover -= 1
            c = (c + 1) % k
        got = np.bincount(labels[split.train_indices], minlength=k).tolist()
        assert got == want, f"n={n}: stratified counts {got} vs counter {want}"
    print("criterion 9 PASS: floor/disjoint/coverage and stratified counts hold for n in [2, 200]")


# ----------------------------------------------------------- criterion 10


def _png_bytes(arr: np.ndarray) -> bytes:
    import io

    from PIL import Image

    buf = io.BytesIO()
    Image.fromarray((np.clip(arr, 0, 1) * 255).astype("uint8")).save(buf, format="PNG")
    return buf.getvalue()


def _fitted_tabular(feature_names, seed, fit):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(60, len(feature_names)))
    y = (X[:, 0] - X[:, -1] > 0).astype(np.int64)
    scaler = ScalerParams(X.mean(axis=0), X.std(axis=0))
    return fit(scaler.transform(X), y), scaler


def test_c10_service_responses_equal_direct_library_predictions(tmp_path):
    """For every disease in the registry, 100 random valid requests
    return exactly the label and probability the library computes
    directly from the same artifact (float equality; JSON round-trips
    float64 losslessly). Malformed requests name the offending fields.
    The service runs with no web UI present."""
    models_dir = tmp_path / "models"
    models_dir.mkdir()

    diabetes, d_scaler = _fitted_tabular(
        PIMA_FEATURES, 42, lambda X, y: fit_logistic(X, y, 0.5, 300, class_names=["0", "1"])
    )
    persistence.save(
        diabetes,
        persistence.ArtifactSchema(PIMA_FEATURES, ["0", "1"], target_name="Outcome"),
        d_scaler,
        str(models_dir / "diabetes.model"),
        disease_tag="diabetes",
    )
    heart, h_scaler = _fitted_tabular(
        HEART_FEATURES, 43, lambda X, y: fit_forest(X, y, TreeConfig(), 15, seed=3, class_names=["0", "1"])
    )
    persistence.save(
        heart,
        persistence.ArtifactSchema(HEART_FEATURES, ["0", "1"], target_name="target"),
        h_scaler,
        str(models_dir / "heart.model"),
        disease_tag="heart",
    )
    Xl, Yl = solid_color_dataset(size=16, per_class=4, seed=0)
    lung = build_lung_cnn((16, 16), seed=1)
    train(lung, Xl, Yl, SGDConfig(learning_rate=0.01, batch_size=4, epochs=20, seed=5))
    persistence.save(
        lung,
        persistence.ArtifactSchema([], ["lung_aca", "lung_n", "lung_scc"], input_kind="image", image_size=(16, 16)),
        None,
        str(models_dir / "lung.model"),
        disease_tag="lung",
    )

    app = create_app(str(models_dir))  # no static_dir: no web UI anywhere
    rng = np.random.default_rng(2024)
    with TestClient(app) as client:
        assert client.get("/health").json() == {"status": "ok", "model_count": 3}
        assert client.get("/").status_code == 404  # nothing mounted at the root

        for disease, features in (("diabetes", PIMA_FEATURES), ("heart", HEART_FEATURES)):
            artifact = persistence.load(str(models_dir / f"{disease}.model"))
            for _ in range(100):
                body = {name: float(v) for name, v in zip(features, rng.uniform(-3, 3, len(features)))}
                got = client.post(f"/predict/{disease}", json=body)
                assert got.status_code == 200
                direct_label, direct_prob = predict_tabular(artifact, body)
                payload = got.json()
                assert payload["label"] == direct_label
                assert payload["probability"] == direct_prob, "probabilities must match exactly"

        artifact = persistence.load(str(models_dir / "lung.model"))
        for _ in range(100):
            png = _png_bytes(rng.uniform(size=(16, 16, 3)))
            got = client.post("/predict/lung", files={"file": ("scan.png", png, "image/png")})
            assert got.status_code == 200
            direct_label, direct_prob = predict_image(artifact, png)
            payload = got.json()
            assert payload["label"] == direct_label
            assert payload["probability"] == direct_prob

        # malformed requests name the fields
        bad = {name: 1.0 for name in PIMA_FEATURES if name != "Glucose"}
        bad["Cholesterol"] = 5.0
        got = client.post("/predict/diabetes", json=bad)
        assert got.status_code == 422
        assert set(got.json()["fields"]) == {"Glucose", "Cholesterol"}
        got = client.post("/predict/diabetes", json={**{n: 1.0 for n in PIMA_FEATURES}, "BMI": None})
        assert got.status_code == 422
        assert got.json()["fields"] == ["BMI"]
    print("criterion 10 PASS: 300 service responses equal direct predictions; field-naming errors verified")
