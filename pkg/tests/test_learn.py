import numpy as np
import pytest
from sklearn.linear_model import LogisticRegression as SkLogistic
from sklearn.multiclass import OneVsRestClassifier
from sklearn.naive_bayes import GaussianNB as SkGaussianNB
from sklearn.neighbors import KNeighborsClassifier
from sklearn.svm import LinearSVC
from sklearn.tree import DecisionTreeClassifier

from sensorleak.features import Dataset
from sensorleak.learn import (
    ALGORITHMS, DecisionTree, GaussianNB, Knn, LearnError, LogisticRegression, Mlp,
    RandomForest, SvmLinear, default_specs, fit, model_from_json, model_to_json, spec_from_name,
)
from sensorleak.learn.mlp import init_params, loss_and_gradient


def blobs(n_per=50, k=4, d=6, sep=20.0, seed=0):
    rng = np.random.default_rng(seed)
    centres = np.zeros((k, d))
    for c in range(1, k):
        centres[c, c - 1] = sep
    X = np.vstack([rng.normal(centres[c], 1.0, (n_per, d)) for c in range(k)])
    y = np.repeat([f"c{c}" for c in range(k)], n_per)
    return X, y


def zscore(X):
    return (X - X.mean(0)) / X.std(0)


@pytest.fixture(scope="module")
def noisy():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(120, 5))
    y = np.where(X[:, 0] + 0.7 * X[:, 1] + rng.normal(0, 0.8, 120) > 0, "a", "b")
    y[::7] = "c"
    return Dataset.from_arrays(X, y)


def test_logistic_matches_liblinear(noisy):
    model = fit(LogisticRegression(C=1.0), noisy)
    ref = OneVsRestClassifier(SkLogistic(C=1.0, solver="liblinear", intercept_scaling=1.0,
                                         tol=1e-12, max_iter=10000))
    ref.fit(zscore(noisy.X), noisy.y)
    W = model.params["W"]
    for row, est in zip(W, ref.estimators_):
        np.testing.assert_allclose(row[:-1], est.coef_[0], atol=1e-6)
        np.testing.assert_allclose(row[-1], est.intercept_[0], atol=1e-6)


@pytest.mark.filterwarnings("ignore::sklearn.exceptions.ConvergenceWarning")
def test_svm_primal_objective_no_worse_than_liblinear(noisy):
    # hinge-loss optima need not be unique, so compare objective values
    C = 0.5
    model = fit(SvmLinear(C=C), noisy)
    Z = zscore(noisy.X)
    ref = LinearSVC(C=C, loss="hinge", dual=True, tol=1e-12, max_iter=200000).fit(Z, noisy.y)
    A = np.hstack([Z, np.ones((len(Z), 1))])
    for j, c in enumerate(model.classes):
        s = np.where(noisy.y == c, 1.0, -1.0)

        def primal(w):
            return 0.5 * w @ w + C * np.maximum(0.0, 1.0 - s * (A @ w)).sum()

        ours = primal(model.params["W"][j])
        theirs = primal(np.r_[ref.coef_[j], ref.intercept_[j]])
        assert ours <= theirs * (1 + 1e-6)


def test_naive_bayes_matches_sklearn(noisy):
    model = fit(GaussianNB(), noisy)
    ref = SkGaussianNB().fit(zscore(noisy.X), noisy.y)
    np.testing.assert_allclose(model.score(noisy.X), ref.predict_proba(zscore(noisy.X)), atol=1e-12)


def test_knn_matches_sklearn_without_ties(noisy):
    model = fit(Knn(k=5), noisy)
    ref = KNeighborsClassifier(5, algorithm="brute").fit(zscore(noisy.X), noisy.y)
    probe = np.random.default_rng(9).normal(size=(40, 5))
    Zp = (probe - noisy.X.mean(0)) / noisy.X.std(0)
    votes = ref.predict_proba(Zp)
    clear = np.sort(votes, axis=1)[:, -1] > np.sort(votes, axis=1)[:, -2]
    assert clear.sum() > 20
    np.testing.assert_array_equal(model.predict(probe)[clear], ref.predict(Zp)[clear])


def test_knn_tie_goes_to_nearest_class():
    X = np.array([[0.0], [1.0], [2.0], [10.0], [11.0], [-30.0]])
    y = np.array(["far", "far", "near", "near", "other", "other"])
    model = fit(Knn(k=4), Dataset.from_arrays(X, y))
    # neighbours of 2.2 (standardised alike): 2 (near), 1 (far), 0 (far), 10 (near) -> 2:2 tie
    assert model.predict(np.array([2.2])) == "near"
    S = model.score(np.array([[2.2]]))
    assert model.classes[int(np.argmax(S))] == "near"


def test_knn_rejects_k_above_rows():
    with pytest.raises(LearnError, match="k"):
        fit(Knn(k=5), Dataset.from_arrays(np.zeros((4, 1)) + np.arange(4)[:, None], list("aabb")))


def test_knn_scale_invariance():
    X, y = blobs(sep=3.0, seed=4)
    probe = np.random.default_rng(1).normal(1.0, 2.0, (30, X.shape[1]))
    a = fit(Knn(), Dataset.from_arrays(X, y)).predict(probe)
    b = fit(Knn(), Dataset.from_arrays(X * 7.5, y)).predict(probe * 7.5)
    np.testing.assert_array_equal(a, b)


def test_decision_tree_matches_sklearn_on_training_fit(noisy):
    model = fit(DecisionTree(), noisy)
    assert np.all(model.predict(noisy.X) == noisy.y)   # unlimited depth, distinct rows
    ref = DecisionTreeClassifier(random_state=0).fit(zscore(noisy.X), noisy.y)
    assert (model.params["feature"] >= 0).sum() == (ref.tree_.feature >= 0).sum()


def test_random_forest_uses_bootstrap_and_seed(noisy):
    a = fit(RandomForest(n_trees=10), noisy, seed=1)
    b = fit(RandomForest(n_trees=10), noisy, seed=1)
    c = fit(RandomForest(n_trees=10), noisy, seed=2)
    probe = np.random.default_rng(0).normal(size=(50, 5))
    np.testing.assert_array_equal(a.score(probe), b.score(probe))
    assert not np.array_equal(a.score(probe), c.score(probe))
    np.testing.assert_allclose(a.score(probe).sum(axis=1), 1.0)


def gradient_check(params, X, Y, h=1e-5):
    _, grads = loss_and_gradient(params, X, Y)
    worst = 0.0
    for name, g in grads.items():
        num = np.zeros_like(g)
        for idx in np.ndindex(g.shape):
            plus = {k: v.copy() for k, v in params.items()}
            minus = {k: v.copy() for k, v in params.items()}
            plus[name][idx] += h
            minus[name][idx] -= h
            num[idx] = (loss_and_gradient(plus, X, Y)[0] - loss_and_gradient(minus, X, Y)[0]) / (2 * h)
        worst = max(worst, np.linalg.norm(g - num) / max(np.linalg.norm(g) + np.linalg.norm(num), 1e-12))
    return worst


def test_mlp_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(10, 6))
    Y = np.eye(3)[rng.integers(0, 3, 10)]
    params = init_params(6, 10, 3, rng)
    assert gradient_check(params, X, Y) <= 1e-4


@pytest.mark.parametrize("name", ALGORITHMS)
def test_separable_blobs_held_out(name):
    X, y = blobs(seed=1)
    Xt, yt = blobs(n_per=25, seed=2)
    model = fit(spec_from_name(name), Dataset.from_arrays(X, y), seed=3)
    pred = model.predict(Xt)
    assert np.mean(pred == yt) >= 0.95
    assert set(pred) <= set(y)


@pytest.mark.parametrize("name", ALGORITHMS)
def test_determinism_and_serialisation(name, noisy):
    spec = default_specs()[name]
    if name == "rf":
        spec = RandomForest(n_trees=15)
    a = fit(spec, noisy, seed=11)
    b = fit(spec, noisy, seed=11)
    probe = np.random.default_rng(2).normal(size=(25, 5))
    np.testing.assert_array_equal(a.score(probe), b.score(probe))
    back = model_from_json(model_to_json(a))
    np.testing.assert_array_equal(back.score(probe), a.score(probe))
    assert back.spec == a.spec and back.classes == a.classes
    single = a.predict(probe[0])
    assert single == a.predict(probe[:1])[0]


def test_probabilistic_scores_sum_to_one(noisy):
    probe = np.random.default_rng(3).normal(size=(10, 5))
    for name, spec in default_specs().items():
        if name == "rf":
            spec = RandomForest(n_trees=5)
        S = fit(spec, noisy).score(probe)
        assert S.shape == (10, 3)
        if spec.probabilistic:
            np.testing.assert_allclose(S.sum(axis=1), 1.0, atol=1e-12)


def test_contract_errors(noisy):
    model = fit(GaussianNB(), noisy)
    with pytest.raises(LearnError, match="features"):
        model.predict(np.zeros((1, 4)))
    with pytest.raises(LearnError, match="finite"):
        model.predict(np.full(5, np.nan))
    with pytest.raises(LearnError, match="two classes"):
        fit(GaussianNB(), Dataset.from_arrays(np.zeros((3, 2)), ["a"] * 3))
    with pytest.raises(LearnError, match="unknown"):
        spec_from_name("xgboost")
    with pytest.raises(LearnError):
        SvmLinear(C=0)
    with pytest.raises(LearnError):
        Mlp(hidden_units=0)
