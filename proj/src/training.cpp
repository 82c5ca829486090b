#include "nopde/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nopde/banded.hpp"
#include "nopde/errors.hpp"
#include "nopde/newton.hpp"
#include "nopde/rng.hpp"
#include "nopde/serialize.hpp"

namespace nopde {

const char* to_string(LossMode m) {
    switch (m) {
        case LossMode::Supervised: return "supervised";
        case LossMode::Unsupervised: return "unsupervised";
        case LossMode::Combined: return "combined";
    }
    return "unknown";
}

LossMode loss_mode_from_string(const std::string& name) {
    if (name == "supervised") return LossMode::Supervised;
    if (name == "unsupervised") return LossMode::Unsupervised;
    if (name == "combined") return LossMode::Combined;
    throw ConfigError("unknown loss mode: " + name);
}

namespace {

void check_dataset(const OperatorDataset& ds, const ScalarProblem& p) {
    if (ds.grid != p.grid) throw std::invalid_argument("dataset grid does not match problem grid");
    if (ds.problem_tag == "grayscott") {
        throw std::invalid_argument("training covers scalar problems; the operator output is scalar-valued");
    }
    if (ds.samples.empty()) throw std::invalid_argument("dataset is empty");
}

struct BatchForward {
    TrunkEval trunk;
    std::vector<MlpCache> branch_caches;
    std::vector<std::vector<double>> branch_outs;
    std::vector<std::vector<double>> outputs;
};

// Shared forward pass: one trunk sweep, one branch pass per sample.
BatchForward forward_batch(const DeepONet& net, const OperatorDataset& ds,
                           std::span<const std::size_t> batch, bool with_caches) {
    BatchForward fwd;
    fwd.trunk = eval_trunk_on_grid(net, ds.grid, with_caches && net.trunk_kind == TrunkKind::Mlp);
    fwd.branch_caches.resize(batch.size());
    fwd.branch_outs.resize(batch.size());
    fwd.outputs.resize(batch.size());
    const int p_rank = net.rank();
    const std::size_t n_points = ds.grid.interior_count();
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const auto& sample = ds.samples[batch[s]];
        const GridFunction u(ds.grid, sample.u, BoundarySpec::zero());
        const std::vector<double> sensors = sample_sensors(u, ds.sensor_stride);
        fwd.branch_outs[s] =
            mlp_forward(net.branch, sensors, with_caches ? &fwd.branch_caches[s] : nullptr);
        auto& out = fwd.outputs[s];
        out.assign(n_points, net.bias0);
        const auto& b = fwd.branch_outs[s];
        for (std::size_t j = 0; j < n_points; ++j) {
            const double* t = fwd.trunk.values.data() + j * p_rank;
            double acc = 0.0;
            for (int k = 0; k < p_rank; ++k) acc += b[static_cast<std::size_t>(k)] * t[k];
            out[j] += acc;
        }
        if (net.trunk_kind == TrunkKind::Pod) {
            for (std::size_t j = 0; j < n_points; ++j) out[j] += net.pod.mean[j];
        }
    }
    return fwd;
}

} // namespace

double mse_loss(const DeepONet& net, const OperatorDataset& ds, const ScalarProblem& p,
                std::span<const std::size_t> batch, DeepONetGrad* grad) {
    check_dataset(ds, p);
    if (batch.empty()) throw std::invalid_argument("empty batch");
    const std::size_t n_points = ds.grid.interior_count();
    const double scale = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(n_points));

    BatchForward fwd = forward_batch(net, ds, batch, grad != nullptr);
    GradAccumulator acc(net, fwd.trunk);

    double loss = 0.0;
    std::vector<double> cot(n_points);
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const auto& du = ds.samples[batch[s]].du;
        if (du.size() != n_points) throw std::invalid_argument("dataset labels missing");
        const auto& out = fwd.outputs[s];
        for (std::size_t j = 0; j < n_points; ++j) {
            const double err = out[j] - du[j];
            loss += err * err;
            cot[j] = 2.0 * scale * err;
        }
        if (grad) acc.add_sample(net, fwd.trunk, fwd.branch_caches[s], fwd.branch_outs[s], cot, *grad);
    }
    if (grad) acc.finish(net, fwd.trunk, *grad);
    return loss * scale;
}

namespace {

double newton_residual_sq(const ScalarProblem& p, const GridFunction& u,
                          std::span<const double> out, std::vector<double>* residual_out) {
    const GridFunction f = residual(p, u);
    const BandedMatrix jac = assemble_jacobian(p, u);
    std::vector<double> r(out.size());
    jac.matvec(out, r);
    double sum = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
        r[j] += f.values[j];
        sum += r[j] * r[j];
    }
    if (residual_out) *residual_out = std::move(r);
    return sum;
}

} // namespace

double newton_loss(const DeepONet& net, const OperatorDataset& ds, const ScalarProblem& p,
                   std::span<const std::size_t> batch, DeepONetGrad* grad) {
    check_dataset(ds, p);
    if (batch.empty()) throw std::invalid_argument("empty batch");
    const std::size_t n_points = ds.grid.interior_count();
    const double scale = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(n_points));

    BatchForward fwd = forward_batch(net, ds, batch, grad != nullptr);
    GradAccumulator acc(net, fwd.trunk);

    double loss = 0.0;
    std::vector<double> cot(n_points);
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const GridFunction u(ds.grid, ds.samples[batch[s]].u, p.boundary);
        std::vector<double> r;
        loss += newton_residual_sq(p, u, fwd.outputs[s], grad ? &r : nullptr);
        if (grad) {
            // d/d(out) of sum r^2 with r = J out + F: cotangent = 2 J^T r.
            const BandedMatrix jac = assemble_jacobian(p, u);
            jac.matvec_transpose(r, cot);
            for (double& c : cot) c *= 2.0 * scale;
            acc.add_sample(net, fwd.trunk, fwd.branch_caches[s], fwd.branch_outs[s], cot, *grad);
        }
    }
    if (grad) acc.finish(net, fwd.trunk, *grad);
    return loss * scale;
}

double newton_loss_of_outputs(const std::vector<std::vector<double>>& outputs,
                              const OperatorDataset& ds, const ScalarProblem& p,
                              std::span<const std::size_t> batch) {
    check_dataset(ds, p);
    if (batch.size() != outputs.size()) throw std::invalid_argument("batch/outputs size mismatch");
    const std::size_t n_points = ds.grid.interior_count();
    const double scale = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(n_points));
    double loss = 0.0;
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const GridFunction u(ds.grid, ds.samples[batch[s]].u, p.boundary);
        loss += newton_residual_sq(p, u, outputs[s], nullptr);
    }
    return loss * scale;
}

double combined_loss(const DeepONet& net, const OperatorDataset& sup,
                     std::span<const std::size_t> sup_batch, const OperatorDataset& unsup,
                     std::span<const std::size_t> unsup_batch, const ScalarProblem& p,
                     double lambda, bool halve, DeepONetGrad* grad) {
    if (sup_batch.empty() && unsup_batch.empty()) {
        throw std::invalid_argument("combined loss needs at least one stream");
    }
    const double factor = halve ? 0.5 : 1.0;
    double total = 0.0;
    if (!sup_batch.empty() && lambda != 0.0) {
        DeepONetGrad* sub = grad;
        DeepONetGrad local;
        if (grad) {
            local = DeepONetGrad::zeros_like(net);
            sub = &local;
        }
        total += lambda * mse_loss(net, sup, p, sup_batch, sub);
        if (grad) grad->add_scaled(local, lambda * factor);
    }
    if (!unsup_batch.empty()) {
        DeepONetGrad* sub = grad;
        DeepONetGrad local;
        if (grad) {
            local = DeepONetGrad::zeros_like(net);
            sub = &local;
        }
        total += newton_loss(net, unsup, p, unsup_batch, sub);
        if (grad) grad->add_scaled(local, factor);
    }
    return total * factor;
}

Metrics evaluate(const DeepONet& net, const OperatorDataset& ds, const ScalarProblem& p) {
    check_dataset(ds, p);
    const std::size_t n = ds.samples.size();
    const std::size_t n_points = ds.grid.interior_count();
    Metrics m;

    const TrunkEval trunk = eval_trunk_on_grid(net, ds.grid, false);
    double mse_sum = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const auto& sample = ds.samples[s];
        const GridFunction u_plain(ds.grid, sample.u, BoundarySpec::zero());
        const std::vector<double> sensors = sample_sensors(u_plain, ds.sensor_stride);
        const std::vector<double> out = deeponet_forward_grid(net, sensors, trunk);

        GridFunction err(ds.grid, out, BoundarySpec::zero());
        GridFunction du(ds.grid, sample.du, BoundarySpec::zero());
        err.add_scaled(du, -1.0);
        for (double e : err.values) mse_sum += e * e;

        const double e_l2 = norm(err, NormKind::L2);
        const double e_h1 = norm(err, NormKind::H1);
        const double e_h2 = norm(err, NormKind::H2);
        const double d_l2 = norm(du, NormKind::L2);
        const double d_h1 = norm(du, NormKind::H1);
        const double d_h2 = norm(du, NormKind::H2);
        m.l2_abs += e_l2;
        m.h1_abs += e_h1;
        m.h2_abs += e_h2;
        m.l2_rel += e_l2 / std::max(d_l2, 1e-300);
        m.h1_rel += e_h1 / std::max(d_h1, 1e-300);
        m.h2_rel += e_h2 / std::max(d_h2, 1e-300);

        const GridFunction u(ds.grid, sample.u, p.boundary);
        m.newton_loss += newton_residual_sq(p, u, out, nullptr);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    m.l2_abs *= inv_n;
    m.l2_rel *= inv_n;
    m.h1_abs *= inv_n;
    m.h1_rel *= inv_n;
    m.h2_abs *= inv_n;
    m.h2_rel *= inv_n;
    m.mse_loss = mse_sum * inv_n / static_cast<double>(n_points);
    m.newton_loss *= inv_n / static_cast<double>(n_points);
    return m;
}

namespace {

struct Shuffler {
    std::vector<std::size_t> order;
    std::size_t cursor = 0;

    explicit Shuffler(std::size_t n) : order(n) { std::iota(order.begin(), order.end(), 0); }

    void reshuffle(Rng& rng) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(i));
            std::swap(order[i - 1], order[std::min(j, i - 1)]);
        }
        cursor = 0;
    }

    // Next k indices, reshuffling when the pass is exhausted.
    std::vector<std::size_t> take(std::size_t k, Rng& rng) {
        std::vector<std::size_t> out;
        out.reserve(k);
        while (out.size() < k) {
            if (cursor == order.size()) reshuffle(rng);
            out.push_back(order[cursor++]);
        }
        return out;
    }
};

} // namespace

TrainResult train(DeepONet& net, const ScalarProblem& p, const OperatorDataset* sup,
                  const OperatorDataset* unsup, const OperatorDataset* test,
                  const TrainConfig& cfg, const EvalCallback& on_eval) {
    if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (cfg.lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    if (cfg.epochs < 0) throw std::invalid_argument("epochs must be >= 0");

    const bool use_sup = cfg.mode != LossMode::Unsupervised;
    const bool use_unsup = cfg.mode != LossMode::Supervised;
    if (use_sup && (!sup || sup->samples.empty())) {
        throw std::invalid_argument("mode needs a supervised dataset");
    }
    if (use_unsup && (!unsup || unsup->samples.empty())) {
        throw std::invalid_argument("mode needs an unsupervised dataset");
    }

    // Minibatch sizes: the larger stream gets batch_size, the other scales
    // proportionally; steps per epoch come from the larger stream.
    std::size_t sup_n = use_sup ? sup->samples.size() : 0;
    std::size_t unsup_n = use_unsup ? unsup->samples.size() : 0;
    std::size_t sup_batch = 0, unsup_batch = 0, steps_per_epoch = 0;
    if (cfg.mode == LossMode::Supervised) {
        sup_batch = std::min<std::size_t>(cfg.batch_size, sup_n);
        steps_per_epoch = (sup_n + sup_batch - 1) / sup_batch;
    } else if (cfg.mode == LossMode::Unsupervised) {
        unsup_batch = std::min<std::size_t>(cfg.batch_size, unsup_n);
        steps_per_epoch = (unsup_n + unsup_batch - 1) / unsup_batch;
    } else {
        const std::size_t large = std::max(sup_n, unsup_n);
        const std::size_t batch = std::min<std::size_t>(cfg.batch_size, large);
        const auto scaled = [&](std::size_t n) {
            return std::max<std::size_t>(
                1, static_cast<std::size_t>(
                       std::llround(static_cast<double>(batch) * static_cast<double>(n) /
                                    static_cast<double>(large))));
        };
        sup_batch = (sup_n == large) ? batch : scaled(sup_n);
        unsup_batch = (unsup_n == large) ? batch : scaled(unsup_n);
        steps_per_epoch = (large + batch - 1) / batch;
    }

    Rng rng(cfg.seed);
    Shuffler sup_shuffle(sup_n), unsup_shuffle(unsup_n);
    if (sup_n) sup_shuffle.reshuffle(rng);
    if (unsup_n) unsup_shuffle.reshuffle(rng);

    AdamState adam = AdamState::for_model(net);
    const AdamConfig adam_cfg{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay};

    TrainResult result;
    DeepONet snapshot = net;

    auto record = [&](int epoch) {
        EvalRecord rec;
        rec.epoch = epoch;
        if (use_sup) {
            rec.train = evaluate(net, *sup, p);
        } else {
            rec.train = evaluate(net, *unsup, p);
        }
        if (test) rec.test = evaluate(net, *test, p);
        result.history.push_back(rec);
        snapshot = net;
        if (on_eval) on_eval(epoch, net);
    };

    record(0);

    DeepONetGrad grad = DeepONetGrad::zeros_like(net);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t step = 0; step < steps_per_epoch; ++step) {
            grad.reset();
            double loss = 0.0;
            switch (cfg.mode) {
                case LossMode::Supervised: {
                    const auto batch = sup_shuffle.take(sup_batch, rng);
                    loss = mse_loss(net, *sup, p, batch, &grad);
                    break;
                }
                case LossMode::Unsupervised: {
                    const auto batch = unsup_shuffle.take(unsup_batch, rng);
                    loss = newton_loss(net, *unsup, p, batch, &grad);
                    break;
                }
                case LossMode::Combined: {
                    const auto sb = sup_shuffle.take(sup_batch, rng);
                    const auto ub = unsup_shuffle.take(unsup_batch, rng);
                    loss = combined_loss(net, *sup, sb, *unsup, ub, p, cfg.lambda,
                                         cfg.combined_halve, &grad);
                    break;
                }
            }
            if (!std::isfinite(loss)) {
                net = snapshot;  // keep the last recorded parameters
                result.nan_abort = true;
                result.message = "non-finite loss at epoch " + std::to_string(epoch) + " step " +
                                 std::to_string(step) + "; restored last checkpoint";
                return result;
            }
            adam_step(adam, adam_cfg, net, grad);
        }
        if (epoch == cfg.epochs || (cfg.eval_every > 0 && epoch % cfg.eval_every == 0)) {
            record(epoch);
        }
    }
    return result;
}

void write_history_csv(const std::string& path, const std::vector<EvalRecord>& history) {
    std::ostringstream out;
    out << "epoch,train_mse,train_newton,test_l2_rel,test_h1_rel,test_h2_rel\n";
    for (const auto& rec : history) {
        out << rec.epoch << ',' << format_double(rec.train.mse_loss) << ','
            << format_double(rec.train.newton_loss) << ',' << format_double(rec.test.l2_rel) << ','
            << format_double(rec.test.h1_rel) << ',' << format_double(rec.test.h2_rel) << '\n';
    }
    write_text_file(path, out.str());
}

} // namespace nopde
