#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nopde/grid.hpp"

namespace nopde {

/// Dense tanh network. Parameters are packed per layer as the out x in
/// weight matrix (row-major) followed by the bias vector. Hidden layers use
/// tanh, the output layer is linear.
struct Mlp {
    std::vector<int> dims;
    std::vector<double> params;

    static Mlp zeros(std::vector<int> dims);

    std::size_t layer_count() const { return dims.empty() ? 0 : dims.size() - 1; }
    std::size_t param_count() const;
    std::size_t layer_offset(std::size_t layer) const;

    std::span<const double> weights(std::size_t layer) const;
    std::span<const double> biases(std::size_t layer) const;
    std::span<double> weights(std::size_t layer);
    std::span<double> biases(std::size_t layer);
};

/// Activations kept for reverse mode: act[0] is the input, act[l] the output
/// of layer l (tanh already applied on hidden layers).
struct MlpCache {
    std::vector<std::vector<double>> act;
};

std::vector<double> mlp_forward(const Mlp& m, std::span<const double> x, MlpCache* cache = nullptr);

/// Accumulates d(cotangent . output)/d(params) into grad_params; optionally
/// also writes the input cotangent.
void mlp_backward(const Mlp& m, const MlpCache& cache, std::span<const double> cotangent,
                  std::span<double> grad_params, std::span<double> grad_input = {});

/// Frozen POD trunk: p orthonormal modes plus the snapshot mean, both on the
/// training grid.
struct PodBasis {
    Grid grid;
    int p = 0;
    std::vector<std::vector<double>> modes;
    std::vector<double> mean;
    std::vector<double> eigenvalues;  // full spectrum of the snapshot Gram matrix
};

/// Method of snapshots: eigen-decomposition of the centered Gram matrix
/// G_ab = <s_a - mean, s_b - mean> h^dim by cyclic Jacobi rotations. Throws
/// when p exceeds the numerical rank (eigenvalue below 1e-12 of the largest).
PodBasis compute_pod_basis(std::span<const GridFunction> samples, int p);

enum class TrunkKind : std::uint8_t { Mlp = 0, Pod = 1 };

/// N(u)(x) = bias0 + sum_k branch_k(u sensors) trunk_k(x); with a POD trunk
/// the mode values stand in for trunk_k and the snapshot mean is added.
struct DeepONet {
    Mlp branch;
    TrunkKind trunk_kind = TrunkKind::Mlp;
    Mlp trunk;
    PodBasis pod;
    double bias0 = 0.0;
    bool bias0_trainable = true;

    // Grid/stride the model was built for; carried in checkpoints so eval
    // and iterate runs are self-describing.
    Grid grid;
    std::uint8_t sensor_stride = 1;

    int rank() const { return branch.dims.back(); }
};

/// Glorot-uniform initialization, seeded; branch first, then trunk, layer by
/// layer, weights row-major. Biases and bias0 start at zero.
DeepONet init_deeponet(const Grid& grid, std::uint8_t sensor_stride, int width, int hidden_depth,
                       int p, std::uint64_t seed, bool bias0_trainable = true,
                       int trunk_hidden_depth = -1);

/// Attaches a frozen POD trunk (rank = pod.p); the branch output dim must
/// already match.
void set_pod_trunk(DeepONet& net, PodBasis pod);

/// Trunk evaluation on every interior grid point. values is n_points x p
/// row-major; caches are kept only for MLP trunks when requested.
struct TrunkEval {
    std::vector<double> values;
    std::vector<MlpCache> caches;
};

TrunkEval eval_trunk_on_grid(const DeepONet& net, const Grid& grid, bool keep_caches);

/// Forward at arbitrary coordinates (MLP trunks only).
std::vector<double> deeponet_forward(const DeepONet& net, std::span<const double> sensors,
                                     std::span<const double> coords);

/// Forward at every interior grid point.
std::vector<double> deeponet_forward_grid(const DeepONet& net, std::span<const double> sensors,
                                          const Grid& grid);

std::vector<double> deeponet_forward_grid(const DeepONet& net, std::span<const double> sensors,
                                          const TrunkEval& trunk);

struct DeepONetGrad {
    std::vector<double> branch;
    std::vector<double> trunk;
    double bias0 = 0.0;

    static DeepONetGrad zeros_like(const DeepONet& net);
    void reset();
    void add_scaled(const DeepONetGrad& other, double factor);
    void scale(double factor);
};

/// Accumulates gradients for a batch that shares one trunk evaluation.
/// Branch gradients are backpropagated per sample; trunk point cotangents
/// accumulate and are swept once by finish(). Accumulation order is the call
/// order, so results are scheduling-independent when driven sequentially.
class GradAccumulator {
public:
    GradAccumulator(const DeepONet& net, const TrunkEval& trunk);

    void add_sample(const DeepONet& net, const TrunkEval& trunk, const MlpCache& branch_cache,
                    std::span<const double> branch_out, std::span<const double> cotangent,
                    DeepONetGrad& grad);
    void finish(const DeepONet& net, const TrunkEval& trunk, DeepONetGrad& grad);

private:
    std::vector<double> point_cotangent_;  // n_points x p
    std::size_t n_points_ = 0;
};

/// Exact gradient of sum_j cotangent_j out_j for one input on the grid.
DeepONetGrad deeponet_backward(const DeepONet& net, std::span<const double> sensors,
                               const Grid& grid, std::span<const double> cotangent);

/// Trainable parameter access in a fixed order: branch, trunk (MLP only),
/// bias0 (when trainable). Used by the optimizer-agnostic checks.
std::size_t trainable_count(const DeepONet& net);
double get_param(const DeepONet& net, std::size_t index);
void set_param(DeepONet& net, std::size_t index, double value);
double grad_entry(const DeepONet& net, const DeepONetGrad& grad, std::size_t index);

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

struct AdamState {
    std::uint64_t step = 0;
    std::vector<double> m_branch, v_branch;
    std::vector<double> m_trunk, v_trunk;
    double m_bias0 = 0.0, v_bias0 = 0.0;

    static AdamState for_model(const DeepONet& net);
};

/// Decoupled weight decay followed by the bias-corrected Adam update.
void adam_step(AdamState& state, const AdamConfig& cfg, DeepONet& net, const DeepONetGrad& grad);

/// "NONN" checkpoint; Adam state is appended when present and flagged.
void save_checkpoint(const std::string& path, const DeepONet& net, const AdamState* adam = nullptr);
DeepONet load_checkpoint(const std::string& path, AdamState* adam_out = nullptr);

} // namespace nopde
