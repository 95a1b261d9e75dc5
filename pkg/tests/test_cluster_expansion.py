import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corroqre import cluster_expansion as ce
from corroqre.errors import ConfigError, DomainError, ParseError, TopologyError

PAIR = ce.ClusterOrbit((0, 1), (1, 1))


def random_orbits(n_sites, rng, n_points=None, n_pairs=6, n_triplets=2):
    orbits = [ce.ClusterOrbit((s,), (1,)) for s in range(n_sites if n_points is None else n_points)]
    pairs = list(itertools.combinations(range(n_sites), 2))
    for idx in rng.choice(len(pairs), n_pairs, replace=False):
        orbits.append(ce.ClusterOrbit(pairs[idx], (1, 1), int(rng.integers(1, 4))))
    for _ in range(n_triplets):
        t = tuple(int(x) for x in rng.choice(n_sites, 3, replace=False))
        orbits.append(ce.ClusterOrbit(t, (1, 1, 1)))
    return orbits


def dataset(n, n_sites, orbits, rng, sigma_noise=0.0, J=None):
    configs = [ce.Configuration(tuple(rng.integers(0, 2, n_sites))) for _ in range(n)]
    X = ce.design_matrix(configs, orbits)
    if J is None:
        J = rng.normal(0, 0.05, X.shape[1])
    E = X @ J + rng.normal(0, sigma_noise, n) if sigma_noise else X @ J
    return list(zip(configs, E)), J


def test_empty_orbits_gives_one():
    assert ce.correlation_vector(ce.Configuration((0, 1, 1)), []).tolist() == [1.0]


def test_pair_indicator():
    assert ce.correlation_vector(ce.Configuration((1, 1)), [PAIR]).tolist() == [1.0, 1.0]
    assert ce.correlation_vector(ce.Configuration((1, 0)), [PAIR]).tolist() == [1.0, 0.0]


def test_instance_permutation_invariance():
    inst = ((0, 1), (1, 2), (2, 3), (3, 0))
    a = ce.ClusterOrbit((0, 1), (1, 1), 1, inst)
    b = ce.ClusterOrbit((0, 1), (1, 1), 1, tuple(reversed(inst)))
    cfg = ce.Configuration((1, 1, 0, 1))
    assert ce.correlation_vector(cfg, [a]).tolist() == ce.correlation_vector(cfg, [b]).tolist()
    assert ce.correlation_vector(cfg, [a])[1] == pytest.approx(0.5)


def test_out_of_range_site():
    with pytest.raises(IndexError):
        ce.correlation_vector(ce.Configuration((0, 1)), [ce.ClusterOrbit((0, 5), (1, 1))])


def test_orbit_validation():
    with pytest.raises(DomainError):
        ce.ClusterOrbit((1, 1), (1, 1))
    with pytest.raises(DomainError):
        ce.ClusterOrbit((0, 1), (1, 1), multiplicity=0)
    with pytest.raises(DomainError):
        ce.Configuration((0, -1))


def test_trig_basis():
    phi = ce.site_function(np.array([0, 1, 2]), 1, "trig", 3)
    assert phi == pytest.approx(-np.cos(2 * np.pi * np.array([0, 1, 2]) / 3))
    phi2 = ce.site_function(np.array([0, 1, 2]), 2, "trig", 3)
    assert phi2 == pytest.approx(-np.sin(2 * np.pi * np.array([0, 1, 2]) / 3))
    with pytest.raises(DomainError):
        ce.site_function(np.array([0]), 3, "trig", 3)


def test_constant_energies():
    train = [(ce.Configuration((i % 2, 1)), -3.25) for i in range(5)]
    model = ce.fit_eci(train, [])
    assert model.J.tolist() == pytest.approx([-3.25])


@pytest.mark.parametrize("seed", range(5))
def test_exact_recovery(seed):
    rng = np.random.default_rng(seed)
    orbits = random_orbits(10, rng)
    train, J = dataset(120, 10, orbits, rng)
    model = ce.fit_eci(train, orbits)
    assert np.max(np.abs(model.J - J)) <= 1e-10
    assert np.max(np.abs(model.predict_many([c for c, _ in train]) - [e for _, e in train])) <= 1e-10
    assert len(model.J) == 1 + len(orbits)


def test_ridge_limit():
    rng = np.random.default_rng(1)
    orbits = random_orbits(8, rng)
    train, _ = dataset(60, 8, orbits, rng, 0.01)
    model = ce.fit_eci(train, orbits, ce.Regularizer("ridge", 1e14))
    assert np.max(np.abs(model.J[1:])) < 1e-9
    assert model.J[0] == pytest.approx(np.mean([e for _, e in train]), abs=1e-9)


def test_ridge_unique_minimizer():
    rng = np.random.default_rng(2)
    orbits = random_orbits(8, rng)
    train, _ = dataset(50, 8, orbits, rng, 0.02)
    reg = ce.Regularizer("ridge", 0.3)
    model = ce.fit_eci(train, orbits, reg)
    X = model.design([c for c, _ in train])
    y = np.array([e for _, e in train])
    f0 = ce.objective(X, y, model.J, reg)
    for i in range(len(model.J)):
        for d in (1e-4, -1e-4):
            J = model.J.copy()
            J[i] += d
            assert ce.objective(X, y, J, reg) > f0


def test_lasso_kkt_and_sparsity():
    rng = np.random.default_rng(3)
    orbits = random_orbits(10, rng)
    J_true = np.zeros(1 + len(orbits))
    J_true[[0, 2, 5]] = [-1.0, 0.3, -0.2]
    train, _ = dataset(200, 10, orbits, rng, 0.005, J_true)
    lam = 0.5
    model = ce.fit_eci(train, orbits, ce.Regularizer("lasso", lam))
    X = model.design([c for c, _ in train])
    y = np.array([e for _, e in train])
    g = 2 * X.T @ (y - X @ model.J)
    assert abs(g[0]) < 1e-6
    active = np.abs(model.J[1:]) > 1e-12
    assert np.allclose(g[1:][active], lam * np.sign(model.J[1:][active]), atol=1e-4)
    assert np.all(np.abs(g[1:][~active]) <= lam + 1e-4)
    assert np.count_nonzero(~active) > 0


def test_lasso_needs_strength():
    with pytest.raises(ConfigError):
        ce.Regularizer("lasso", 0.0)
    with pytest.raises(ConfigError):
        ce.Regularizer("elastic", 1.0)


def test_min_norm_when_rank_deficient():
    cfgs = [ce.Configuration((s,)) for s in (0, 1, 0, 1)]
    orbits = [ce.ClusterOrbit((0,), (1,)), ce.ClusterOrbit((0,), (1,))]
    train = list(zip(cfgs, [1.0, 2.0, 1.0, 2.0]))
    model = ce.fit_eci(train, orbits)
    assert model.J == pytest.approx([1.0, 0.5, 0.5])


def test_training_errors():
    with pytest.raises(DomainError):
        ce.fit_eci([], [])
    with pytest.raises(DomainError):
        ce.fit_eci([(ce.Configuration((0,)), float("nan"))], [])
    with pytest.raises(DomainError):
        ce.loo_cv([(ce.Configuration((0,)), 1.0)], [])


def test_cv_zero_noiseless():
    rng = np.random.default_rng(4)
    orbits = random_orbits(10, rng)
    train, _ = dataset(80, 10, orbits, rng)
    assert ce.loo_cv(train, orbits) <= 1e-9
    assert ce.loo_cv(train, orbits, method="hat") <= 1e-9


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("reg", [ce.Regularizer(), ce.Regularizer("ridge", 0.05), ce.Regularizer("ridge", 3.0)])
def test_hat_matches_literal(seed, reg):
    rng = np.random.default_rng(100 + seed)
    orbits = random_orbits(9, rng)
    train, _ = dataset(40, 9, orbits, rng, 0.01)
    X = ce.design_matrix([c for c, _ in train], orbits)
    y = np.array([e for _, e in train])
    lit = ce.loo_residuals_literal(X, y, reg)
    fast = ce.loo_residuals_hat(X, y, reg)
    assert np.max(np.abs(lit - fast)) <= 1e-9
    assert ce.loo_cv(train, orbits, reg) == pytest.approx(ce.loo_cv(train, orbits, reg, method="hat"), abs=1e-9)


def test_parallel_literal_refits_identical():
    rng = np.random.default_rng(7)
    orbits = random_orbits(9, rng)
    train, _ = dataset(40, 9, orbits, rng, 0.01)
    assert ce.loo_cv(train, orbits, n_workers=4) == ce.loo_cv(train, orbits)


def test_cv_tracks_noise():
    sigma = 0.004  # eV/atom
    scores = []
    for seed in range(8):
        rng = np.random.default_rng(seed)
        orbits = random_orbits(10, rng)
        train, _ = dataset(500, 10, orbits, rng, sigma)
        scores.append(ce.loo_cv(train, orbits, method="hat"))
    assert abs(np.mean(scores) / (sigma * 1000) - 1) < 0.2
    assert ce.cv_passes(np.mean(scores)) is True and ce.cv_passes(8.0) is False


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_cv_row_order_invariant(seed):
    rng = np.random.default_rng(seed)
    orbits = random_orbits(6, rng, n_pairs=3, n_triplets=1)
    train, _ = dataset(25, 6, orbits, rng, 0.01)
    perm = rng.permutation(len(train))
    shuffled = [train[i] for i in perm]
    assert ce.loo_cv(shuffled, orbits) == pytest.approx(ce.loo_cv(train, orbits), rel=1e-10, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=4, max_size=12))
def test_first_component_is_one(sig):
    orbits = [ce.ClusterOrbit((0, 1), (1, 2)), ce.ClusterOrbit((2,), (3,))]
    assert ce.correlation_vector(ce.Configuration(tuple(sig)), orbits)[0] == 1.0


def test_cdlce_columns_and_recovery():
    rng = np.random.default_rng(11)
    orbits = random_orbits(8, rng, n_pairs=4, n_triplets=0)
    configs = [ce.Configuration(tuple(rng.integers(0, 2, 8))) for _ in range(200)]
    X = ce.design_matrix(configs, orbits, concentration_degree=2)
    assert X.shape[1] == 3 * (1 + len(orbits))
    J = rng.normal(0, 0.1, X.shape[1])
    train = list(zip(configs, X @ J))
    model = ce.fit_eci(train, orbits, concentration_degree=2)
    assert np.max(np.abs(model.predict_many(configs) - X @ J)) < 1e-9


def test_model_json_roundtrip():
    rng = np.random.default_rng(5)
    orbits = random_orbits(6, rng, n_pairs=3, n_triplets=1)
    train, _ = dataset(30, 6, orbits, rng, 0.001)
    m = ce.fit_eci(train, orbits, ce.Regularizer("ridge", 0.1), with_cv=True)
    back = ce.ClusterExpansionModel.from_json(m.to_json())
    cfg = train[0][0]
    assert back.predict(cfg) == m.predict(cfg) and back.cv_score == m.cv_score >= 0


def test_training_csv():
    text = "s0,s1,energy\n0,1,-1.5\n1,1,-1.25\n"
    rows = ce.parse_training_csv(text)
    assert rows[1][0].sigma == (1, 1) and rows[1][1] == -1.25
    assert ce.parse_training_csv(ce.training_to_csv(rows))[0][1] == -1.5
    with pytest.raises(ParseError):
        ce.parse_training_csv("0,1,x\n")
    with pytest.raises(ParseError):
        ce.parse_training_csv("0,1,2\n0,1\n")
    with pytest.raises(ParseError):
        ce.parse_training_json("{bad")


def test_translation_orbits_bcc():
    lat = ce.bcc_lattice(1.0, (2, 2, 2))
    # nearest neighbors at sqrt(3)/2: 8 corner-to-center bond directions, the reverse bonds are mirrors
    protos = ce.pair_prototypes(lat, 0.9)
    assert len(protos) == 8
    # second neighbors at a: 3 directions per sublattice once mirrors are folded
    assert len(ce.pair_prototypes(lat, 1.01)) == 8 + 2 * 3
    orbits = ce.translation_orbits(lat, protos)
    assert all(len(o.instances) == 8 for o in orbits)
    sig = ce.Configuration(tuple([1] * lat.n_sites))
    assert np.all(ce.correlation_vector(sig, orbits) == 1.0)


def test_barrier_constants_and_identical():
    cfg = ce.Configuration((0, 1, 1, 0))
    assert ce.barrier(ce.constant_model(1.0), ce.constant_model(1.5), cfg, (0, 1)) == pytest.approx(0.5)
    m = ce.ClusterExpansionModel((PAIR,), np.array([0.2, 0.7]))
    assert ce.barrier(m, m, cfg, (0, 1)) == 0.0


def toy_hop_lattice():
    # 4 interstitial sites on a ring, metal sites 0..3; oct i sees metals (i, i+1),
    # the saddle between i and i+1 sees (i+1, i, i+2)
    nbrs = {i: {(i + 1) % 4, (i - 1) % 4} for i in range(4)}
    octs = {i: (i, (i + 1) % 4) for i in range(4)}
    tets = {(i, (i + 1) % 4): ((i + 1) % 4, i, (i + 2) % 4) for i in range(4)}
    return ce.TableHopLattice(nbrs, octs, tets, "toy")


def test_barrier_hand_evaluation():
    lat = toy_hop_lattice()
    oct_m = ce.ClusterExpansionModel((ce.ClusterOrbit((0,), (1,)), ce.ClusterOrbit((0, 1), (1, 1))),
                                     np.array([1.0, 0.1, -0.2]))
    tet_m = ce.ClusterExpansionModel((ce.ClusterOrbit((0,), (1,), 1, ((0,), (1,), (2,))),
                                      ce.ClusterOrbit((1, 2), (1, 1), 2)), np.array([1.6, 0.3, 0.05]))
    cfg = ce.Configuration((1, 1, 0, 1), "toy")
    # oct(0): metals (0,1) = (1,1) -> 1 + 0.1*1 - 0.2*1 = 0.9
    # tet(0,1): metals (1,0,2) = (1,1,0) -> 1.6 + 0.3*(2/3) + 2*0.05*(1*0) = 1.8
    assert ce.barrier(oct_m, tet_m, cfg, (0, 1), lat) == pytest.approx(0.9)
    # reverse hop uses the same saddle, origin oct(1): metals (1,2) = (1,0) -> 1.1
    assert ce.barrier(oct_m, tet_m, cfg, (1, 0), lat) == pytest.approx(0.7)
    neg = ce.ClusterExpansionModel((), np.array([0.5]))
    assert ce.barrier(oct_m, neg, cfg, (0, 1), lat) == pytest.approx(-0.4)
    assert ce.barrier(oct_m, neg, cfg, (0, 1), lat, clamp=True) == 0.0


def test_barrier_topology_errors():
    lat = toy_hop_lattice()
    m = ce.constant_model(0.0)
    with pytest.raises(TopologyError):
        ce.barrier(m, m, ce.Configuration((0, 0, 0, 0), "toy"), (0, 2), lat)
    with pytest.raises(TopologyError):
        ce.barrier(m, m, ce.Configuration((0, 0, 0, 0), "other"), (0, 1), lat)
