#include "nopde/surrogate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "nopde/datagen.hpp"
#include "nopde/serialize.hpp"

namespace nopde {

ModelOracle::ModelOracle(const DeepONet& net, const Grid& grid)
    : net_(net), grid_(grid), trunk_(eval_trunk_on_grid(net, grid, false)) {}

GridFunction ModelOracle::step(const GridFunction& u) const {
    const std::vector<double> sensors = sample_sensors(u, net_.sensor_stride);
    std::vector<double> out = deeponet_forward_grid(net_, sensors, trunk_);
    return GridFunction(grid_, std::move(out), BoundarySpec::zero());
}

OperatorTrajectory operator_iterate(const StepOracle& oracle, const ScalarProblem& p,
                                    const GridFunction& u0, int max_steps, double hybrid_tail_tol,
                                    const std::vector<GridFunction>* reference_solutions,
                                    double divergence_cap) {
    if (u0.grid != p.grid) throw std::invalid_argument("initial state grid mismatch");
    OperatorTrajectory traj;
    GridFunction u = u0;

    auto nearest_distance = [&](const GridFunction& v) -> double {
        if (!reference_solutions || reference_solutions->empty()) return -1.0;
        double best = -1.0;
        for (const auto& sol : *reference_solutions) {
            const double d = rel_l2_distance(v, sol);
            if (best < 0.0 || d < best) best = d;
        }
        return best;
    };

    double prev_residual = 0.0;
    for (int step_idx = 0; step_idx <= max_steps; ++step_idx) {
        const double res = linf(residual(p, u).values);
        traj.iterates.push_back(u);
        IterateRecord rec;
        rec.step = step_idx;
        rec.residual_linf = res;
        rec.dist_to_solution_rel_l2 = nearest_distance(u);
        if (step_idx > 0 && res > prev_residual && traj.first_residual_increase < 0) {
            traj.first_residual_increase = step_idx;
        }
        traj.records.push_back(rec);
        if (!std::isfinite(res) || linf(u.values) > divergence_cap) {
            traj.diverged = true;
            break;
        }
        if (step_idx == max_steps) break;
        prev_residual = res;

        // used_exact_newton marks the step leaving this iterate.
        const bool exact = hybrid_tail_tol > 0.0 && res < hybrid_tail_tol;
        traj.records.back().used_exact_newton = exact;
        GridFunction delta = exact ? newton_step(p, u) : oracle.step(u);
        u.add_scaled(delta, 1.0);
    }
    return traj;
}

void write_operator_trajectory_csv(const std::string& path, const OperatorTrajectory& traj) {
    std::ostringstream out;
    out << "step,residual_linf,dist_to_solution_rel_l2,used_exact_newton\n";
    for (const auto& rec : traj.records) {
        out << rec.step << ',' << format_double(rec.residual_linf) << ','
            << format_double(rec.dist_to_solution_rel_l2) << ',' << (rec.used_exact_newton ? 1 : 0)
            << '\n';
    }
    write_text_file(path, out.str());
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::vector<BenchRow> bench(const ScalarProblem& p, const DeepONet& net, const GridFunction& base,
                            const std::vector<int>& counts, int repetitions, std::uint64_t seed,
                            int threads) {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    using clock = std::chrono::steady_clock;
    std::vector<BenchRow> rows;
    for (int count : counts) {
        if (count < 1) throw std::invalid_argument("bench counts must be >= 1");
        // Identical inputs for both columns: seeded spectral perturbations.
        std::vector<GridFunction> inputs;
        inputs.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
            GridFunction u = base;
            GridFunction v = spectral_gaussian_field(rng, p.grid, 1.0, 16, 2.0);
            u.add_scaled(v, 1.0);
            inputs.push_back(std::move(u));
        }

        std::vector<double> solver_times, operator_times;
        for (int rep = 0; rep < repetitions; ++rep) {
            const auto t0 = clock::now();
            const BatchStepResult steps = batch_newton_step(p, inputs, threads);
            const auto t1 = clock::now();
            solver_times.push_back(std::chrono::duration<double>(t1 - t0).count());
            (void)steps;
        }
        const TrunkEval trunk = eval_trunk_on_grid(net, p.grid, false);
        volatile double sink = 0.0;  // keeps the forward passes observable
        for (int rep = 0; rep < repetitions; ++rep) {
            const auto t0 = clock::now();
            for (const auto& u : inputs) {
                const std::vector<double> sensors = sample_sensors(u, net.sensor_stride);
                const std::vector<double> out = deeponet_forward_grid(net, sensors, trunk);
                sink = sink + out[0];
            }
            const auto t1 = clock::now();
            operator_times.push_back(std::chrono::duration<double>(t1 - t0).count());
        }

        BenchRow row;
        row.n_systems = count;
        row.solver_seconds = median(solver_times);
        row.operator_seconds = median(operator_times);
        row.solver_seconds_min = *std::min_element(solver_times.begin(), solver_times.end());
        row.operator_seconds_min = *std::min_element(operator_times.begin(), operator_times.end());
        row.speedup = row.operator_seconds > 0.0 ? row.solver_seconds / row.operator_seconds : 0.0;
        rows.push_back(row);
    }
    return rows;
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "n_systems,solver_seconds,operator_seconds,speedup\n";
    for (const auto& row : rows) {
        out << row.n_systems << ',' << format_double(row.solver_seconds) << ','
            << format_double(row.operator_seconds) << ',' << format_double(row.speedup) << '\n';
    }
    write_text_file(path, out.str());
}

} // namespace nopde
