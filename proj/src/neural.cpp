#include "nopde/neural.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nopde/errors.hpp"
#include "nopde/rng.hpp"
#include "nopde/serialize.hpp"

namespace nopde {

Mlp Mlp::zeros(std::vector<int> dims) {
    if (dims.size() < 2) throw std::invalid_argument("mlp needs at least one layer");
    Mlp m;
    m.dims = std::move(dims);
    m.params.assign(m.param_count(), 0.0);
    return m;
}

std::size_t Mlp::param_count() const {
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        total += static_cast<std::size_t>(dims[l + 1]) * dims[l] + dims[l + 1];
    }
    return total;
}

std::size_t Mlp::layer_offset(std::size_t layer) const {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l) {
        off += static_cast<std::size_t>(dims[l + 1]) * dims[l] + dims[l + 1];
    }
    return off;
}

std::span<const double> Mlp::weights(std::size_t layer) const {
    return {params.data() + layer_offset(layer),
            static_cast<std::size_t>(dims[layer + 1]) * dims[layer]};
}

std::span<const double> Mlp::biases(std::size_t layer) const {
    const std::size_t w = static_cast<std::size_t>(dims[layer + 1]) * dims[layer];
    return {params.data() + layer_offset(layer) + w, static_cast<std::size_t>(dims[layer + 1])};
}

std::span<double> Mlp::weights(std::size_t layer) {
    return {params.data() + layer_offset(layer),
            static_cast<std::size_t>(dims[layer + 1]) * dims[layer]};
}

std::span<double> Mlp::biases(std::size_t layer) {
    const std::size_t w = static_cast<std::size_t>(dims[layer + 1]) * dims[layer];
    return {params.data() + layer_offset(layer) + w, static_cast<std::size_t>(dims[layer + 1])};
}

std::vector<double> mlp_forward(const Mlp& m, std::span<const double> x, MlpCache* cache) {
    if (static_cast<int>(x.size()) != m.dims.front()) {
        throw std::invalid_argument("mlp input length mismatch");
    }
    if (cache) {
        cache->act.assign(m.layer_count() + 1, {});
        cache->act[0].assign(x.begin(), x.end());
    }
    std::vector<double> cur(x.begin(), x.end());
    const std::size_t layers = m.layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
        const int in = m.dims[l];
        const int out = m.dims[l + 1];
        const auto w = m.weights(l);
        const auto b = m.biases(l);
        std::vector<double> next(static_cast<std::size_t>(out));
        for (int o = 0; o < out; ++o) {
            double acc = b[static_cast<std::size_t>(o)];
            const double* row = w.data() + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) acc += row[i] * cur[static_cast<std::size_t>(i)];
            next[static_cast<std::size_t>(o)] = (l + 1 < layers) ? std::tanh(acc) : acc;
        }
        cur = std::move(next);
        if (cache) cache->act[l + 1] = cur;
    }
    return cur;
}

void mlp_backward(const Mlp& m, const MlpCache& cache, std::span<const double> cotangent,
                  std::span<double> grad_params, std::span<double> grad_input) {
    const std::size_t layers = m.layer_count();
    if (cache.act.size() != layers + 1) throw std::invalid_argument("stale mlp cache");
    std::vector<double> delta(cotangent.begin(), cotangent.end());
    for (std::size_t l = layers; l-- > 0;) {
        const int in = m.dims[l];
        const int out = m.dims[l + 1];
        // Hidden layers: fold the tanh derivative into the running cotangent.
        if (l + 1 < layers) {
            const auto& act = cache.act[l + 1];
            for (int o = 0; o < out; ++o) {
                const double a = act[static_cast<std::size_t>(o)];
                delta[static_cast<std::size_t>(o)] *= 1.0 - a * a;
            }
        }
        const auto& prev = cache.act[l];
        const std::size_t off = m.layer_offset(l);
        double* gw = grad_params.data() + off;
        double* gb = gw + static_cast<std::size_t>(out) * in;
        for (int o = 0; o < out; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            gb[o] += d;
            double* grow = gw + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) grow[i] += d * prev[static_cast<std::size_t>(i)];
        }
        if (l > 0 || !grad_input.empty()) {
            const auto w = m.weights(l);
            std::vector<double> prev_delta(static_cast<std::size_t>(in), 0.0);
            for (int o = 0; o < out; ++o) {
                const double d = delta[static_cast<std::size_t>(o)];
                const double* row = w.data() + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) prev_delta[static_cast<std::size_t>(i)] += d * row[i];
            }
            if (l == 0) {
                for (std::size_t i = 0; i < prev_delta.size(); ++i) grad_input[i] = prev_delta[i];
                return;
            }
            delta = std::move(prev_delta);
        }
    }
}

namespace {

/// Cyclic Jacobi eigensolver for small symmetric matrices. a is n x n
/// row-major and is destroyed; eigenvectors come back as columns.
void symmetric_eigen_jacobi(std::vector<double>& a, int n, std::vector<double>& values,
                            std::vector<double>& vectors) {
    vectors.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) vectors[static_cast<std::size_t>(i) * n + i] = 1.0;
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
    auto vat = [&](int i, int j) -> double& { return vectors[static_cast<std::size_t>(i) * n + j]; };

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        }
        if (off < 1e-28 * std::max(1.0, std::fabs(at(0, 0)))) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = at(k, p);
                    const double akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(p, k);
                    const double aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = vat(k, p);
                    const double vkq = vat(k, q);
                    vat(k, p) = c * vkp - s * vkq;
                    vat(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    values.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = at(i, i);
}

} // namespace

PodBasis compute_pod_basis(std::span<const GridFunction> samples, int p) {
    const int m = static_cast<int>(samples.size());
    if (p < 1) throw std::invalid_argument("pod rank must be positive");
    if (m < p) throw std::invalid_argument("pod needs at least p snapshots");
    const Grid grid = samples[0].grid;
    for (const auto& s : samples) {
        if (s.grid != grid) throw std::invalid_argument("pod snapshots on mixed grids");
    }
    const std::size_t len = grid.interior_count();
    const double hd = (grid.dim == 1) ? grid.h : grid.h * grid.h;

    PodBasis basis;
    basis.grid = grid;
    basis.p = p;
    basis.mean.assign(len, 0.0);
    for (const auto& s : samples) {
        for (std::size_t j = 0; j < len; ++j) basis.mean[j] += s.values[j];
    }
    for (auto& v : basis.mean) v /= m;

    std::vector<std::vector<double>> centered(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
        centered[static_cast<std::size_t>(a)].resize(len);
        for (std::size_t j = 0; j < len; ++j) {
            centered[static_cast<std::size_t>(a)][j] = samples[a].values[j] - basis.mean[j];
        }
    }

    std::vector<double> gram(static_cast<std::size_t>(m) * m, 0.0);
    for (int a = 0; a < m; ++a) {
        for (int b = a; b < m; ++b) {
            double dot = 0.0;
            for (std::size_t j = 0; j < len; ++j) {
                dot += centered[static_cast<std::size_t>(a)][j] * centered[static_cast<std::size_t>(b)][j];
            }
            dot *= hd;
            gram[static_cast<std::size_t>(a) * m + b] = dot;
            gram[static_cast<std::size_t>(b) * m + a] = dot;
        }
    }

    std::vector<double> values, vectors;
    symmetric_eigen_jacobi(gram, m, values, vectors);

    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
    });

    basis.eigenvalues.resize(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        basis.eigenvalues[static_cast<std::size_t>(k)] = values[static_cast<std::size_t>(order[k])];
    }

    const double lambda_max = basis.eigenvalues.empty() ? 0.0 : basis.eigenvalues[0];
    // Rank floor relative to the raw snapshot energy, so zero-variance
    // families (all snapshots equal) fail even though centering leaves
    // rounding noise in the Gram matrix.
    double raw_energy = 0.0;
    for (const auto& s : samples) {
        for (double v : s.values) raw_energy += v * v;
    }
    raw_energy *= hd;
    const double floor = 1e-12 * std::max(raw_energy, lambda_max);
    basis.modes.resize(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) {
        const double lambda = basis.eigenvalues[static_cast<std::size_t>(k)];
        if (!(lambda > floor) || lambda <= 0.0) {
            throw NumericalError("pod rank " + std::to_string(p) +
                                 " exceeds the numerical rank of the snapshots");
        }
        auto& mode = basis.modes[static_cast<std::size_t>(k)];
        mode.assign(len, 0.0);
        const double inv_sqrt = 1.0 / std::sqrt(lambda);
        for (int a = 0; a < m; ++a) {
            const double w = vectors[static_cast<std::size_t>(a) * m + order[k]] * inv_sqrt;
            if (w == 0.0) continue;
            const auto& x = centered[static_cast<std::size_t>(a)];
            for (std::size_t j = 0; j < len; ++j) mode[j] += w * x[j];
        }
        // Scale so the discrete L2 norm is exactly one.
        double nrm = 0.0;
        for (double v : mode) nrm += v * v;
        nrm = std::sqrt(nrm * hd);
        for (double& v : mode) v /= nrm;
    }
    return basis;
}

DeepONet init_deeponet(const Grid& grid, std::uint8_t sensor_stride, int width, int hidden_depth,
                       int p, std::uint64_t seed, bool bias0_trainable, int trunk_hidden_depth) {
    if (width < 1 || hidden_depth < 1 || p < 1) {
        throw std::invalid_argument("bad deeponet architecture");
    }
    if (trunk_hidden_depth < 0) trunk_hidden_depth = hidden_depth;
    const int per_axis = sensor_count_per_axis(grid, sensor_stride);
    const int sensor_len = grid.dim == 1 ? per_axis : per_axis * per_axis;

    auto make_dims = [&](int in, int hidden) {
        std::vector<int> dims{in};
        for (int l = 0; l < hidden; ++l) dims.push_back(width);
        dims.push_back(p);
        return dims;
    };

    DeepONet net;
    net.branch = Mlp::zeros(make_dims(sensor_len, hidden_depth));
    net.trunk = Mlp::zeros(make_dims(grid.dim, trunk_hidden_depth));
    net.trunk_kind = TrunkKind::Mlp;
    net.bias0 = 0.0;
    net.bias0_trainable = bias0_trainable;
    net.grid = grid;
    net.sensor_stride = sensor_stride;

    Rng rng(seed);
    auto glorot = [&rng](Mlp& m) {
        for (std::size_t l = 0; l < m.layer_count(); ++l) {
            const double limit = std::sqrt(6.0 / (m.dims[l] + m.dims[l + 1]));
            for (double& w : m.weights(l)) w = rng.uniform(-limit, limit);
        }
    };
    glorot(net.branch);
    glorot(net.trunk);
    return net;
}

void set_pod_trunk(DeepONet& net, PodBasis pod) {
    if (pod.p != net.rank()) {
        throw std::invalid_argument("pod rank does not match branch output dim");
    }
    net.trunk_kind = TrunkKind::Pod;
    net.trunk = Mlp();
    net.pod = std::move(pod);
}

TrunkEval eval_trunk_on_grid(const DeepONet& net, const Grid& grid, bool keep_caches) {
    const std::size_t n_points = grid.interior_count();
    const int p = net.rank();
    TrunkEval eval;
    eval.values.assign(n_points * static_cast<std::size_t>(p), 0.0);
    if (net.trunk_kind == TrunkKind::Pod) {
        if (net.pod.grid != grid) {
            throw std::invalid_argument("pod trunk is bound to its training grid");
        }
        for (std::size_t j = 0; j < n_points; ++j) {
            for (int k = 0; k < p; ++k) {
                eval.values[j * p + k] = net.pod.modes[static_cast<std::size_t>(k)][j];
            }
        }
        return eval;
    }
    const std::vector<double> coords = grid_coords(grid);
    if (keep_caches) eval.caches.resize(n_points);
    for (std::size_t j = 0; j < n_points; ++j) {
        const std::span<const double> x(coords.data() + j * grid.dim,
                                        static_cast<std::size_t>(grid.dim));
        const std::vector<double> out =
            mlp_forward(net.trunk, x, keep_caches ? &eval.caches[j] : nullptr);
        std::copy(out.begin(), out.end(), eval.values.begin() + j * p);
    }
    return eval;
}

std::vector<double> deeponet_forward(const DeepONet& net, std::span<const double> sensors,
                                     std::span<const double> coords) {
    if (net.trunk_kind == TrunkKind::Pod) {
        throw std::invalid_argument("pod trunks only evaluate on their grid");
    }
    const int dim = net.trunk.dims.front();
    if (coords.size() % dim != 0) throw std::invalid_argument("coords length mismatch");
    const std::size_t n_points = coords.size() / dim;
    const std::vector<double> b = mlp_forward(net.branch, sensors);
    std::vector<double> out(n_points, net.bias0);
    for (std::size_t j = 0; j < n_points; ++j) {
        const std::vector<double> t =
            mlp_forward(net.trunk, coords.subspan(j * dim, static_cast<std::size_t>(dim)));
        double acc = 0.0;
        for (int k = 0; k < net.rank(); ++k) acc += b[static_cast<std::size_t>(k)] * t[static_cast<std::size_t>(k)];
        out[j] += acc;
    }
    return out;
}

std::vector<double> deeponet_forward_grid(const DeepONet& net, std::span<const double> sensors,
                                          const TrunkEval& trunk) {
    const int p = net.rank();
    const std::vector<double> b = mlp_forward(net.branch, sensors);
    const std::size_t n_points = trunk.values.size() / static_cast<std::size_t>(p);
    std::vector<double> out(n_points, net.bias0);
    for (std::size_t j = 0; j < n_points; ++j) {
        const double* t = trunk.values.data() + j * p;
        double acc = 0.0;
        for (int k = 0; k < p; ++k) acc += b[static_cast<std::size_t>(k)] * t[k];
        out[j] += acc;
    }
    if (net.trunk_kind == TrunkKind::Pod) {
        for (std::size_t j = 0; j < n_points; ++j) out[j] += net.pod.mean[j];
    }
    return out;
}

std::vector<double> deeponet_forward_grid(const DeepONet& net, std::span<const double> sensors,
                                          const Grid& grid) {
    const TrunkEval trunk = eval_trunk_on_grid(net, grid, false);
    return deeponet_forward_grid(net, sensors, trunk);
}

DeepONetGrad DeepONetGrad::zeros_like(const DeepONet& net) {
    DeepONetGrad g;
    g.branch.assign(net.branch.params.size(), 0.0);
    if (net.trunk_kind == TrunkKind::Mlp) g.trunk.assign(net.trunk.params.size(), 0.0);
    g.bias0 = 0.0;
    return g;
}

void DeepONetGrad::reset() {
    std::fill(branch.begin(), branch.end(), 0.0);
    std::fill(trunk.begin(), trunk.end(), 0.0);
    bias0 = 0.0;
}

void DeepONetGrad::add_scaled(const DeepONetGrad& other, double factor) {
    for (std::size_t i = 0; i < branch.size(); ++i) branch[i] += factor * other.branch[i];
    for (std::size_t i = 0; i < trunk.size(); ++i) trunk[i] += factor * other.trunk[i];
    bias0 += factor * other.bias0;
}

void DeepONetGrad::scale(double factor) {
    for (double& v : branch) v *= factor;
    for (double& v : trunk) v *= factor;
    bias0 *= factor;
}

GradAccumulator::GradAccumulator(const DeepONet& net, const TrunkEval& trunk) {
    const int p = net.rank();
    n_points_ = trunk.values.size() / static_cast<std::size_t>(p);
    point_cotangent_.assign(trunk.values.size(), 0.0);
}

void GradAccumulator::add_sample(const DeepONet& net, const TrunkEval& trunk,
                                 const MlpCache& branch_cache, std::span<const double> branch_out,
                                 std::span<const double> cotangent, DeepONetGrad& grad) {
    const int p = net.rank();
    if (cotangent.size() != n_points_) throw std::invalid_argument("cotangent shape mismatch");

    std::vector<double> branch_cot(static_cast<std::size_t>(p), 0.0);
    for (std::size_t j = 0; j < n_points_; ++j) {
        const double c = cotangent[j];
        grad.bias0 += c;
        if (c == 0.0) continue;
        const double* t = trunk.values.data() + j * p;
        double* pc = point_cotangent_.data() + j * p;
        for (int k = 0; k < p; ++k) {
            branch_cot[static_cast<std::size_t>(k)] += c * t[k];
            pc[k] += c * branch_out[static_cast<std::size_t>(k)];
        }
    }
    mlp_backward(net.branch, branch_cache, branch_cot, grad.branch);
}

void GradAccumulator::finish(const DeepONet& net, const TrunkEval& trunk, DeepONetGrad& grad) {
    if (!net.bias0_trainable) grad.bias0 = 0.0;
    if (net.trunk_kind == TrunkKind::Pod) return;  // frozen modes take no gradient
    const int p = net.rank();
    for (std::size_t j = 0; j < n_points_; ++j) {
        const std::span<const double> cot(point_cotangent_.data() + j * p,
                                          static_cast<std::size_t>(p));
        mlp_backward(net.trunk, trunk.caches[j], cot, grad.trunk);
    }
}

DeepONetGrad deeponet_backward(const DeepONet& net, std::span<const double> sensors,
                               const Grid& grid, std::span<const double> cotangent) {
    const TrunkEval trunk = eval_trunk_on_grid(net, grid, net.trunk_kind == TrunkKind::Mlp);
    DeepONetGrad grad = DeepONetGrad::zeros_like(net);
    MlpCache branch_cache;
    const std::vector<double> b = mlp_forward(net.branch, sensors, &branch_cache);
    GradAccumulator acc(net, trunk);
    acc.add_sample(net, trunk, branch_cache, b, cotangent, grad);
    acc.finish(net, trunk, grad);
    return grad;
}

std::size_t trainable_count(const DeepONet& net) {
    std::size_t total = net.branch.params.size();
    if (net.trunk_kind == TrunkKind::Mlp) total += net.trunk.params.size();
    if (net.bias0_trainable) total += 1;
    return total;
}

double get_param(const DeepONet& net, std::size_t index) {
    if (index < net.branch.params.size()) return net.branch.params[index];
    index -= net.branch.params.size();
    if (net.trunk_kind == TrunkKind::Mlp) {
        if (index < net.trunk.params.size()) return net.trunk.params[index];
        index -= net.trunk.params.size();
    }
    if (net.bias0_trainable && index == 0) return net.bias0;
    throw std::out_of_range("parameter index out of range");
}

void set_param(DeepONet& net, std::size_t index, double value) {
    if (index < net.branch.params.size()) {
        net.branch.params[index] = value;
        return;
    }
    index -= net.branch.params.size();
    if (net.trunk_kind == TrunkKind::Mlp) {
        if (index < net.trunk.params.size()) {
            net.trunk.params[index] = value;
            return;
        }
        index -= net.trunk.params.size();
    }
    if (net.bias0_trainable && index == 0) {
        net.bias0 = value;
        return;
    }
    throw std::out_of_range("parameter index out of range");
}

double grad_entry(const DeepONet& net, const DeepONetGrad& grad, std::size_t index) {
    if (index < grad.branch.size()) return grad.branch[index];
    index -= grad.branch.size();
    if (net.trunk_kind == TrunkKind::Mlp) {
        if (index < grad.trunk.size()) return grad.trunk[index];
        index -= grad.trunk.size();
    }
    if (net.bias0_trainable && index == 0) return grad.bias0;
    throw std::out_of_range("gradient index out of range");
}

AdamState AdamState::for_model(const DeepONet& net) {
    AdamState s;
    s.m_branch.assign(net.branch.params.size(), 0.0);
    s.v_branch.assign(net.branch.params.size(), 0.0);
    if (net.trunk_kind == TrunkKind::Mlp) {
        s.m_trunk.assign(net.trunk.params.size(), 0.0);
        s.v_trunk.assign(net.trunk.params.size(), 0.0);
    }
    return s;
}

namespace {

void adam_update_span(std::span<double> params, std::span<const double> grads,
                      std::span<double> m, std::span<double> v, const AdamConfig& cfg,
                      double bc1, double bc2) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (cfg.weight_decay != 0.0) params[i] -= cfg.lr * cfg.weight_decay * params[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grads[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

} // namespace

void adam_step(AdamState& state, const AdamConfig& cfg, DeepONet& net, const DeepONetGrad& grad) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    adam_update_span(net.branch.params, grad.branch, state.m_branch, state.v_branch, cfg, bc1, bc2);
    if (net.trunk_kind == TrunkKind::Mlp) {
        adam_update_span(net.trunk.params, grad.trunk, state.m_trunk, state.v_trunk, cfg, bc1, bc2);
    }
    if (net.bias0_trainable) {
        double p[1] = {net.bias0};
        const double g[1] = {grad.bias0};
        double m[1] = {state.m_bias0};
        double v[1] = {state.v_bias0};
        adam_update_span(p, g, m, v, cfg, bc1, bc2);
        net.bias0 = p[0];
        state.m_bias0 = m[0];
        state.v_bias0 = v[0];
    }
}

namespace {

constexpr std::uint16_t kCheckpointVersion = 1;

void write_mlp(ByteWriter& w, const Mlp& m) {
    w.u32(static_cast<std::uint32_t>(m.dims.size()));
    for (int d : m.dims) w.u32(static_cast<std::uint32_t>(d));
    w.f64_array(m.params);
}

Mlp read_mlp(ByteReader& r) {
    const std::uint32_t n_dims = r.u32();
    std::vector<int> dims(n_dims);
    for (auto& d : dims) d = static_cast<int>(r.u32());
    Mlp m = Mlp::zeros(std::move(dims));
    m.params = r.f64_array(m.param_count());
    return m;
}

} // namespace

void save_checkpoint(const std::string& path, const DeepONet& net, const AdamState* adam) {
    ByteWriter w;
    w.magic("NONN");
    w.u16(kCheckpointVersion);
    w.u8(static_cast<std::uint8_t>(net.trunk_kind));
    std::uint8_t flags = 0;
    if (adam) flags |= 1;
    if (net.bias0_trainable) flags |= 2;
    w.u8(flags);
    w.u8(static_cast<std::uint8_t>(net.grid.dim));
    w.u32(static_cast<std::uint32_t>(net.grid.n_interior));
    w.u8(net.sensor_stride);
    write_mlp(w, net.branch);
    if (net.trunk_kind == TrunkKind::Mlp) {
        write_mlp(w, net.trunk);
    } else {
        const std::size_t len = net.pod.grid.interior_count();
        w.u32(static_cast<std::uint32_t>(net.pod.p));
        w.u32(static_cast<std::uint32_t>(len));
        for (const auto& mode : net.pod.modes) w.f64_array(mode);
        w.f64_array(net.pod.mean);
        w.u32(static_cast<std::uint32_t>(net.pod.eigenvalues.size()));
        w.f64_array(net.pod.eigenvalues);
    }
    w.f64(net.bias0);
    if (adam) {
        w.u64(adam->step);
        w.f64_array(adam->m_branch);
        w.f64_array(adam->v_branch);
        w.f64_array(adam->m_trunk);
        w.f64_array(adam->v_trunk);
        w.f64(adam->m_bias0);
        w.f64(adam->v_bias0);
    }
    write_file(path, w.bytes());
}

DeepONet load_checkpoint(const std::string& path, AdamState* adam_out) {
    const std::string data = read_file(path);
    ByteReader r(data);
    r.expect_magic("NONN");
    const std::uint16_t version = r.u16();
    if (version != kCheckpointVersion) {
        throw VersionMismatchError("checkpoint version " + std::to_string(version));
    }
    DeepONet net;
    net.trunk_kind = static_cast<TrunkKind>(r.u8());
    const std::uint8_t flags = r.u8();
    net.bias0_trainable = (flags & 2) != 0;
    const int dim = r.u8();
    const int n = static_cast<int>(r.u32());
    net.grid = (dim == 1) ? Grid::make_1d(n) : Grid::make_2d(n);
    net.sensor_stride = r.u8();
    net.branch = read_mlp(r);
    if (net.trunk_kind == TrunkKind::Mlp) {
        net.trunk = read_mlp(r);
    } else {
        net.pod.grid = net.grid;
        net.pod.p = static_cast<int>(r.u32());
        const std::size_t len = r.u32();
        net.pod.modes.resize(static_cast<std::size_t>(net.pod.p));
        for (auto& mode : net.pod.modes) mode = r.f64_array(len);
        net.pod.mean = r.f64_array(len);
        net.pod.eigenvalues = r.f64_array(r.u32());
    }
    net.bias0 = r.f64();
    if ((flags & 1) != 0 && adam_out) {
        adam_out->step = r.u64();
        adam_out->m_branch = r.f64_array(net.branch.params.size());
        adam_out->v_branch = r.f64_array(net.branch.params.size());
        const std::size_t trunk_n = net.trunk_kind == TrunkKind::Mlp ? net.trunk.params.size() : 0;
        adam_out->m_trunk = r.f64_array(trunk_n);
        adam_out->v_trunk = r.f64_array(trunk_n);
        adam_out->m_bias0 = r.f64();
        adam_out->v_bias0 = r.f64();
    }
    return net;
}

} // namespace nopde
