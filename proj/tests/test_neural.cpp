#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "nopde/neural.hpp"
#include "nopde/serialize.hpp"
#include "nopde/sha256.hpp"

using namespace nopde;

TEST_CASE("mlp forward basics") {
    Mlp m = Mlp::zeros({3, 4, 2});
    const std::vector<double> x{1.0, -2.0, 0.5};
    const auto out = mlp_forward(m, x);
    CHECK(out.size() == 2);
    for (double v : out) CHECK(v == 0.0);  // zero weights, zero biases

    // tanh(0) = 0 propagates zeros through hidden layers.
    for (double& w : m.weights(1)) w = 0.7;
    const auto out2 = mlp_forward(m, std::vector<double>{0.0, 0.0, 0.0});
    for (double v : out2) CHECK(v == 0.0);

    CHECK_THROWS(mlp_forward(m, std::vector<double>{1.0}));
}

TEST_CASE("mlp gradients match central finite differences") {
    Rng rng(31);
    Mlp m = Mlp::zeros({4, 5, 5, 2});
    for (auto& p : m.params) p = rng.uniform(-0.8, 0.8);
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform(-1, 1);
    const std::vector<double> cot{0.7, -1.3};

    MlpCache cache;
    mlp_forward(m, x, &cache);
    std::vector<double> grad(m.params.size(), 0.0);
    std::vector<double> grad_x(x.size(), 0.0);
    mlp_backward(m, cache, cot, grad, grad_x);

    auto scalar_loss = [&](const Mlp& model, const std::vector<double>& input) {
        const auto out = mlp_forward(model, input);
        double acc = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) acc += cot[i] * out[i];
        return acc;
    };

    const double eps = 1e-6;
    for (std::size_t idx = 0; idx < m.params.size(); idx += 7) {
        Mlp mp = m, mm = m;
        mp.params[idx] += eps;
        mm.params[idx] -= eps;
        const double fd = (scalar_loss(mp, x) - scalar_loss(mm, x)) / (2 * eps);
        CHECK(grad[idx] == doctest::Approx(fd).epsilon(1e-6));
    }
    for (std::size_t idx = 0; idx < x.size(); ++idx) {
        auto xp = x, xm = x;
        xp[idx] += eps;
        xm[idx] -= eps;
        const double fd = (scalar_loss(m, xp) - scalar_loss(m, xm)) / (2 * eps);
        CHECK(grad_x[idx] == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("deeponet forward: rank-1 factorization and golden output") {
    const Grid g = Grid::make_1d(20);

    // Zero branch output -> every output equals bias0.
    DeepONet zero_net = init_deeponet(g, 1, 8, 2, 6, 1);
    for (auto& p : zero_net.branch.params) p = 0.0;
    zero_net.bias0 = 0.25;
    std::vector<double> sensors(20, 0.3);
    for (double v : deeponet_forward_grid(zero_net, sensors, g)) CHECK(v == 0.25);

    // Golden vector from the reference run, seed 2024.
    DeepONet net = init_deeponet(g, 1, 8, 2, 6, 2024);
    for (int i = 0; i < 20; ++i) sensors[static_cast<std::size_t>(i)] = std::sin(0.3 * i);
    const auto out = deeponet_forward_grid(net, sensors, g);
    CHECK(out[0] == -0.0003864911470765741);
    CHECK(out[7] == -0.0027427253361787972);
    CHECK(out[19] == -0.0046518615797141597);
    ByteWriter w;
    w.f64_array(out);
    CHECK(sha256_hex(w.bytes()) == "38b60d44da794a0bf5e19f92f3c0801357a7e4bb7aa976c46d7de6306372b84f");
    CHECK(trainable_count(net) == 437);

    // Same seed, same bytes.
    DeepONet net2 = init_deeponet(g, 1, 8, 2, 6, 2024);
    CHECK(net.branch.params == net2.branch.params);
    CHECK(net.trunk.params == net2.trunk.params);

    // Arbitrary-coordinate evaluation agrees with the grid path and accepts
    // off-grid query points.
    const std::vector<double> coords = grid_coords(g);
    CHECK(deeponet_forward(net, sensors, coords) == out);
    const std::vector<double> off{0.123, 0.789};
    const auto two = deeponet_forward(net, sensors, off);
    CHECK(two.size() == 2);
    for (double v : two) CHECK(std::isfinite(v));
}

TEST_CASE("deeponet backward matches finite differences across all parameters") {
    const Grid g = Grid::make_1d(9);
    DeepONet net = init_deeponet(g, 1, 6, 2, 4, 77);
    Rng rng(5);
    std::vector<double> sensors(9);
    for (auto& v : sensors) v = rng.uniform(-1, 1);
    std::vector<double> cot(g.interior_count());
    for (auto& v : cot) v = rng.uniform(-1, 1);

    const DeepONetGrad grad = deeponet_backward(net, sensors, g, cot);

    auto loss = [&](const DeepONet& model) {
        const auto out = deeponet_forward_grid(model, sensors, g);
        double acc = 0.0;
        for (std::size_t j = 0; j < out.size(); ++j) acc += cot[j] * out[j];
        return acc;
    };

    const std::size_t total = trainable_count(net);
    const double eps = 1e-6;
    for (std::size_t idx = 0; idx < total; idx += 3) {
        DeepONet np = net, nm = net;
        set_param(np, idx, get_param(net, idx) + eps);
        set_param(nm, idx, get_param(net, idx) - eps);
        const double fd = (loss(np) - loss(nm)) / (2 * eps);
        CHECK(grad_entry(net, grad, idx) == doctest::Approx(fd).epsilon(2e-6));
    }

    // Zero cotangent -> zero gradient.
    const DeepONetGrad zg = deeponet_backward(net, sensors, g, std::vector<double>(9, 0.0));
    for (double v : zg.branch) CHECK(v == 0.0);
    for (double v : zg.trunk) CHECK(v == 0.0);
    CHECK(zg.bias0 == 0.0);
}

TEST_CASE("adam closed-form first step and no-op cases") {
    const Grid g = Grid::make_1d(5);
    DeepONet net = init_deeponet(g, 1, 4, 1, 3, 11);
    const DeepONet before = net;

    AdamState st = AdamState::for_model(net);
    AdamConfig cfg;
    cfg.lr = 1e-3;

    // Zero gradient, zero decay: parameters unchanged (0/(sqrt(0)+eps) = 0).
    DeepONetGrad zero = DeepONetGrad::zeros_like(net);
    adam_step(st, cfg, net, zero);
    CHECK(net.branch.params == before.branch.params);
    CHECK(net.trunk.params == before.trunk.params);

    // Constant gradient: first update is lr * g/(|g| + eps) ~ lr * sign(g).
    DeepONet fresh = before;
    AdamState st2 = AdamState::for_model(fresh);
    DeepONetGrad grad = DeepONetGrad::zeros_like(fresh);
    for (auto& v : grad.branch) v = 2.5;
    adam_step(st2, cfg, fresh, grad);
    for (std::size_t i = 0; i < fresh.branch.params.size(); ++i) {
        const double delta = before.branch.params[i] - fresh.branch.params[i];
        CHECK(delta == doctest::Approx(cfg.lr).epsilon(1e-6));
    }

    // lr = 0 freezes everything even with nonzero gradients.
    DeepONet frozen = before;
    AdamState st3 = AdamState::for_model(frozen);
    AdamConfig cfg0;
    cfg0.lr = 0.0;
    adam_step(st3, cfg0, frozen, grad);
    CHECK(frozen.branch.params == before.branch.params);

    // Decoupled weight decay shrinks parameters before the moment update.
    DeepONet decayed = before;
    AdamState st4 = AdamState::for_model(decayed);
    AdamConfig cfgw;
    cfgw.lr = 1e-3;
    cfgw.weight_decay = 0.5;
    adam_step(st4, cfgw, decayed, zero);
    for (std::size_t i = 0; i < decayed.branch.params.size(); ++i) {
        CHECK(decayed.branch.params[i] ==
              doctest::Approx(before.branch.params[i] * (1.0 - cfgw.lr * cfgw.weight_decay)));
    }
}

TEST_CASE("pod basis: orthonormal modes, span, parseval, rank errors") {
    const Grid g = Grid::make_1d(40);
    const double hd = g.h;

    auto sine = [&](int k) {
        GridFunction u(g);
        for (int i = 0; i < g.n_interior; ++i) {
            u.at(i) = std::sin(k * std::numbers::pi * g.coord(i));
        }
        return u;
    };

    // Zero-mean family built from two orthogonal sines: the centered Gram
    // matrix then has exact rank 2.
    GridFunction s1 = sine(1), s2 = sine(2);
    GridFunction m1 = s1, m2 = s2;
    m1.scale(-1.0);
    m2.scale(-1.0);
    std::vector<GridFunction> snaps{s1, s2, m1, m2};
    const PodBasis basis = compute_pod_basis(snaps, 2);

    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            double dot = 0.0;
            for (std::size_t j = 0; j < basis.modes[a].size(); ++j) {
                dot += basis.modes[a][j] * basis.modes[b][j];
            }
            dot *= hd;
            CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-10));
        }
    }

    // Projector onto the modes equals the projector onto span{s1, s2}.
    auto project = [&](const std::vector<std::vector<double>>& onb, const GridFunction& v) {
        std::vector<double> out(v.values.size(), 0.0);
        for (const auto& q : onb) {
            double c = 0.0;
            for (std::size_t j = 0; j < q.size(); ++j) c += q[j] * v.values[j] * hd;
            for (std::size_t j = 0; j < q.size(); ++j) out[j] += c * q[j];
        }
        return out;
    };
    std::vector<std::vector<double>> ref_onb;
    for (GridFunction* s : {&s1, &s2}) {
        std::vector<double> q = s->values;
        double nrm = 0.0;
        for (double v : q) nrm += v * v;
        nrm = std::sqrt(nrm * hd);
        for (double& v : q) v /= nrm;
        ref_onb.push_back(std::move(q));
    }
    Rng rng(2);
    const GridFunction probe = testhelpers::random_field(rng, g);
    CHECK(testhelpers::max_abs_diff(project(basis.modes, probe), project(ref_onb, probe)) < 1e-8);

    // Parseval: projection energy of the snapshots equals the eigenvalue mass.
    double captured = 0.0;
    for (const auto& s : snaps) {
        GridFunction centered = s;
        for (std::size_t j = 0; j < centered.values.size(); ++j) centered.values[j] -= basis.mean[j];
        const auto proj = project(basis.modes, centered);
        for (double v : proj) captured += v * v * hd;
    }
    const double mass = basis.eigenvalues[0] + basis.eigenvalues[1];
    CHECK(captured == doctest::Approx(mass).epsilon(1e-8));

    // Identical snapshots have zero variance: rank error for p >= 1.
    std::vector<GridFunction> equal{s1, s1, s1};
    CHECK_THROWS_AS(compute_pod_basis(equal, 1), NumericalError);
    // p beyond the snapshot count is a precondition violation.
    CHECK_THROWS_AS(compute_pod_basis(snaps, 5), std::invalid_argument);

    // POD trunk: frozen modes, mean added, no trunk gradient.
    DeepONet net = init_deeponet(g, 1, 6, 2, 2, 3);
    set_pod_trunk(net, basis);
    std::vector<double> sensors(g.interior_count());
    for (auto& v : sensors) v = 0.1;
    const auto out = deeponet_forward_grid(net, sensors, g);
    CHECK(out.size() == g.interior_count());
    const DeepONetGrad grad =
        deeponet_backward(net, sensors, g, std::vector<double>(g.interior_count(), 1.0));
    CHECK(grad.trunk.empty());
}

TEST_CASE("tanh keeps hidden activations bounded and outputs finite") {
    Rng rng(66);
    Mlp m = Mlp::zeros({6, 8, 8, 3});
    for (auto& p : m.params) p = rng.uniform(-3.0, 3.0);
    std::vector<double> huge{1e6, -1e6, 1e5, -1e5, 1e4, -1e4};
    MlpCache cache;
    const auto out = mlp_forward(m, huge, &cache);
    for (double v : out) CHECK(std::isfinite(v));
    for (std::size_t l = 1; l + 1 < cache.act.size(); ++l) {
        for (double a : cache.act[l]) {
            CHECK(a >= -1.0);
            CHECK(a <= 1.0);
        }
    }
}

TEST_CASE("checkpoint round trip with adam state") {
    const Grid g = Grid::make_1d(12);
    DeepONet net = init_deeponet(g, 1, 5, 2, 4, 9);
    net.bias0 = 0.125;
    AdamState st = AdamState::for_model(net);
    st.step = 7;
    st.m_branch[0] = 0.5;
    st.v_bias0 = 2.0;

    save_checkpoint("test_ckpt.nonn", net, &st);
    AdamState back_st;
    const DeepONet back = load_checkpoint("test_ckpt.nonn", &back_st);
    CHECK(back.branch.params == net.branch.params);
    CHECK(back.trunk.params == net.trunk.params);
    CHECK(back.bias0 == net.bias0);
    CHECK(back.grid == net.grid);
    CHECK(back.sensor_stride == net.sensor_stride);
    CHECK(back_st.step == 7);
    CHECK(back_st.m_branch[0] == 0.5);
    CHECK(back_st.v_bias0 == 2.0);

    // POD checkpoints carry the frozen basis.
    GridFunction a(g), b(g);
    for (int i = 0; i < g.n_interior; ++i) {
        a.at(i) = std::sin(std::numbers::pi * g.coord(i));
        b.at(i) = std::sin(2 * std::numbers::pi * g.coord(i));
    }
    GridFunction na = a, nb = b;
    na.scale(-1.0);
    nb.scale(-1.0);
    DeepONet podnet = init_deeponet(g, 1, 5, 2, 2, 9);
    podnet.bias0_trainable = false;
    set_pod_trunk(podnet, compute_pod_basis(std::vector<GridFunction>{a, b, na, nb}, 2));
    save_checkpoint("test_ckpt_pod.nonn", podnet);
    const DeepONet pod_back = load_checkpoint("test_ckpt_pod.nonn");
    CHECK(pod_back.trunk_kind == TrunkKind::Pod);
    CHECK(pod_back.pod.modes == podnet.pod.modes);
    CHECK(pod_back.pod.mean == podnet.pod.mean);
    CHECK(pod_back.bias0_trainable == false);
}
