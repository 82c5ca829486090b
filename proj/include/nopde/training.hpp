#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nopde/datagen.hpp"
#include "nopde/neural.hpp"
#include "nopde/problems.hpp"

namespace nopde {

enum class LossMode { Supervised, Unsupervised, Combined };

const char* to_string(LossMode m);
LossMode loss_mode_from_string(const std::string& name);

struct TrainConfig {
    LossMode mode = LossMode::Combined;
    double lambda = 0.01;        // supervised weight in combined mode
    double lr = 1e-4;
    double weight_decay = 1e-6;
    int batch_size = 50;
    int epochs = 100;
    std::uint64_t seed = 0;
    int eval_every = 10;         // epochs between metric records
    bool combined_halve = false; // (lambda*mse + newton)/2 variant
};

struct Metrics {
    double l2_abs = 0.0, l2_rel = 0.0;
    double h1_abs = 0.0, h1_rel = 0.0;
    double h2_abs = 0.0, h2_rel = 0.0;
    double mse_loss = 0.0;
    double newton_loss = 0.0;
};

struct EvalRecord {
    int epoch = 0;
    Metrics train;
    Metrics test;
};

struct TrainResult {
    std::vector<EvalRecord> history;
    bool nan_abort = false;
    std::string message;
};

/// Mean squared prediction error over the batch, evaluated at every interior
/// grid point: (1/(N_u N_y)) sum |N(u_j)(y_k) - du_j(y_k)|^2. Accumulates the
/// exact gradient when grad is non-null.
double mse_loss(const DeepONet& net, const OperatorDataset& ds, const ScalarProblem& p,
                std::span<const std::size_t> batch, DeepONetGrad* grad = nullptr);

/// Physics residual of the linearized system, label-free:
/// (1/(m M)) sum_i ||J(u_i) N(u_i) + F(u_i)||^2 with the banded Jacobian.
double newton_loss(const DeepONet& net, const OperatorDataset& ds, const ScalarProblem& p,
                   std::span<const std::size_t> batch, DeepONetGrad* grad = nullptr);

/// Newton loss with the model replaced by externally supplied outputs; the
/// cross-check that dataset labels zero the loss.
double newton_loss_of_outputs(const std::vector<std::vector<double>>& outputs,
                              const OperatorDataset& ds, const ScalarProblem& p,
                              std::span<const std::size_t> batch);

/// lambda * mse(sup batch) + newton(unsup batch); halve = true divides the
/// total by two (equal-weights preset).
double combined_loss(const DeepONet& net, const OperatorDataset& sup,
                     std::span<const std::size_t> sup_batch, const OperatorDataset& unsup,
                     std::span<const std::size_t> unsup_batch, const ScalarProblem& p,
                     double lambda, bool halve = false, DeepONetGrad* grad = nullptr);

Metrics evaluate(const DeepONet& net, const OperatorDataset& ds, const ScalarProblem& p);

using EvalCallback = std::function<void(int epoch, const DeepONet& net)>;

/// Adam training with seeded shuffling. Supervised mode consumes `sup`;
/// unsupervised consumes `unsup`; combined consumes both with per-step
/// minibatch sizes proportional to the dataset sizes. Metrics are recorded
/// before training, every eval_every epochs, and at the end. A non-finite
/// loss aborts and restores the parameters of the last recorded epoch.
TrainResult train(DeepONet& net, const ScalarProblem& p, const OperatorDataset* sup,
                  const OperatorDataset* unsup, const OperatorDataset* test,
                  const TrainConfig& cfg, const EvalCallback& on_eval = {});

/// CSV: epoch, train_mse, train_newton, test_l2_rel, test_h1_rel, test_h2_rel.
void write_history_csv(const std::string& path, const std::vector<EvalRecord>& history);

} // namespace nopde
