#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nopde/neural.hpp"
#include "nopde/newton.hpp"
#include "nopde/problems.hpp"

namespace nopde {

/// Produces a candidate Newton step for the current iterate. The returned
/// field always has zero boundary values.
class StepOracle {
public:
    virtual ~StepOracle() = default;
    virtual GridFunction step(const GridFunction& u) const = 0;
};

/// Wraps the trained operator: sensors(u) -> branch, evaluated on the grid.
class ModelOracle : public StepOracle {
public:
    ModelOracle(const DeepONet& net, const Grid& grid);
    GridFunction step(const GridFunction& u) const override;

private:
    const DeepONet& net_;
    Grid grid_;
    TrunkEval trunk_;  // the trunk depends only on the grid
};

/// The exact solver step; used for the definitional-equivalence checks.
class ExactNewtonOracle : public StepOracle {
public:
    explicit ExactNewtonOracle(const ScalarProblem& p) : problem_(p) {}
    GridFunction step(const GridFunction& u) const override { return newton_step(problem_, u); }

private:
    const ScalarProblem& problem_;
};

struct IterateRecord {
    int step = 0;
    double residual_linf = 0.0;
    double dist_to_solution_rel_l2 = -1.0;  // -1 when no reference set given
    bool used_exact_newton = false;
};

struct OperatorTrajectory {
    std::vector<GridFunction> iterates;
    std::vector<IterateRecord> records;
    int first_residual_increase = -1;  // diagnostic, -1 if monotone
    bool diverged = false;
};

/// u <- u + oracle(u), recording the true nonlinear residual and (when a
/// reference set is given) the relative L2 distance to the nearest catalog
/// solution. hybrid_tail_tol > 0 switches to exact Newton steps once the
/// residual falls below it.
OperatorTrajectory operator_iterate(const StepOracle& oracle, const ScalarProblem& p,
                                    const GridFunction& u0, int max_steps,
                                    double hybrid_tail_tol = 0.0,
                                    const std::vector<GridFunction>* reference_solutions = nullptr,
                                    double divergence_cap = 1e6);

void write_operator_trajectory_csv(const std::string& path, const OperatorTrajectory& traj);

struct BenchRow {
    int n_systems = 0;
    double solver_seconds = 0.0;    // median over repetitions
    double operator_seconds = 0.0;  // median over repetitions
    double solver_seconds_min = 0.0;
    double operator_seconds_min = 0.0;
    double speedup = 0.0;
};

/// Wall-clock comparison of batch_newton_step against the batched operator
/// forward on identical inputs. Inputs are seeded spectral perturbations of
/// the given base state.
std::vector<BenchRow> bench(const ScalarProblem& p, const DeepONet& net,
                            const GridFunction& base, const std::vector<int>& counts,
                            int repetitions, std::uint64_t seed, int threads = 1);

/// CSV: n_systems, solver_seconds, operator_seconds, speedup.
void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);

} // namespace nopde
