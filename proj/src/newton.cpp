#include "nopde/newton.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "nopde/errors.hpp"
#include "nopde/parallel.hpp"

namespace nopde {

const char* to_string(NewtonStatus s) {
    switch (s) {
        case NewtonStatus::Converged: return "converged";
        case NewtonStatus::MaxIter: return "max_iter";
        case NewtonStatus::Diverged: return "diverged";
        case NewtonStatus::SingularJacobian: return "singular_jacobian";
    }
    return "unknown";
}

GridFunction NewtonTrajectory::iterate_field(std::size_t k) const {
    if (species != 1) throw std::logic_error("iterate_field is for scalar trajectories");
    return GridFunction(grid, iterates.at(k), boundary);
}

GridFunction NewtonTrajectory::step_field(std::size_t k) const {
    if (species != 1) throw std::logic_error("step_field is for scalar trajectories");
    return GridFunction(grid, steps.at(k), BoundarySpec::zero());
}

std::pair<GridFunction, GridFunction> NewtonTrajectory::iterate_fields_gs(std::size_t k) const {
    if (species != 2) throw std::logic_error("iterate_fields_gs is for Gray-Scott trajectories");
    const std::size_t m = grid.interior_count();
    const auto& v = iterates.at(k);
    std::vector<double> a(v.begin(), v.begin() + m);
    std::vector<double> s(v.begin() + m, v.end());
    return {GridFunction(grid, std::move(a)), GridFunction(grid, std::move(s))};
}

BandedMatrix assemble_jacobian(const ScalarProblem& p, const GridFunction& u) {
    const GridFunction rdiag = jacobian_diag(p, u);
    const int n = p.grid.n_interior;
    const double inv_h2 = 1.0 / (p.grid.h * p.grid.h);
    if (p.grid.dim == 1) {
        BandedMatrix m(n, 1, 1);
        for (int i = 0; i < n; ++i) {
            m.at(i, i) = 2.0 * inv_h2 + rdiag.at(i);
            if (i > 0) m.at(i, i - 1) = -inv_h2;
            if (i < n - 1) m.at(i, i + 1) = -inv_h2;
        }
        return m;
    }
    const int order = n * n;
    BandedMatrix m(order, n, n);
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const int idx = iy * n + ix;
            m.at(idx, idx) = 4.0 * inv_h2 + rdiag.at(ix, iy);
            if (ix > 0) m.at(idx, idx - 1) = -inv_h2;
            if (ix < n - 1) m.at(idx, idx + 1) = -inv_h2;
            if (iy > 0) m.at(idx, idx - n) = -inv_h2;
            if (iy < n - 1) m.at(idx, idx + n) = -inv_h2;
        }
    }
    return m;
}

BandedMatrix assemble_jacobian(const GrayScottProblem& p, const GridFunction& a,
                               const GridFunction& s) {
    const GrayScottJacobianDiag blocks = jacobian_blocks(p, a, s);
    const int n = p.grid.n_interior;
    const double inv_h2 = 1.0 / (p.grid.h * p.grid.h);
    const int band = 2 * n + 1;
    BandedMatrix m(2 * n * n, band, band);
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const int node = iy * n + ix;
            const int row_a = 2 * node;
            const int row_s = row_a + 1;
            int missing = 0;
            const int nbs[4] = {ix > 0 ? node - 1 : -1, ix < n - 1 ? node + 1 : -1,
                                iy > 0 ? node - n : -1, iy < n - 1 ? node + n : -1};
            for (int nb : nbs) {
                if (nb < 0) {
                    ++missing;  // replicate padding folds into the diagonal
                    continue;
                }
                m.at(row_a, 2 * nb) = p.d_a * inv_h2;
                m.at(row_s, 2 * nb + 1) = p.d_s * inv_h2;
            }
            const double lap_diag = (missing - 4.0) * inv_h2;
            m.at(row_a, row_a) = p.d_a * lap_diag + blocks.d_aa.at(ix, iy);
            m.at(row_a, row_s) = blocks.d_as.at(ix, iy);
            m.at(row_s, row_a) = blocks.d_sa.at(ix, iy);
            m.at(row_s, row_s) = p.d_s * lap_diag + blocks.d_ss.at(ix, iy);
        }
    }
    return m;
}

GridFunction newton_step(const ScalarProblem& p, const GridFunction& u) {
    const GridFunction f = residual(p, u);
    const BandedMatrix jac = assemble_jacobian(p, u);
    std::vector<double> rhs(f.values.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -f.values[i];
    return GridFunction(p.grid, banded_lu_solve(jac, rhs), BoundarySpec::zero());
}

std::pair<GridFunction, GridFunction> newton_step(const GrayScottProblem& p, const GridFunction& a,
                                                  const GridFunction& s) {
    const auto [fa, fs] = residual_system(p, a, s);
    const BandedMatrix jac = assemble_jacobian(p, a, s);
    const std::size_t m = p.grid.interior_count();
    std::vector<double> rhs(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        rhs[2 * i] = -fa.values[i];
        rhs[2 * i + 1] = -fs.values[i];
    }
    const std::vector<double> delta = banded_lu_solve(jac, rhs);
    GridFunction da(p.grid), ds(p.grid);
    for (std::size_t i = 0; i < m; ++i) {
        da.values[i] = delta[2 * i];
        ds.values[i] = delta[2 * i + 1];
    }
    return {std::move(da), std::move(ds)};
}

namespace {

// Shared iteration skeleton over raw unknown vectors.
NewtonTrajectory newton_iterate(
    Grid grid, int species, BoundarySpec boundary, std::vector<double> state,
    const NewtonConfig& cfg,
    const std::function<std::vector<double>(const std::vector<double>&)>& residual_of,
    const std::function<std::vector<double>(const std::vector<double>&)>& step_of) {
    if (cfg.tol_residual <= 0.0 || cfg.max_iter < 1) {
        throw std::invalid_argument("invalid Newton configuration");
    }
    NewtonTrajectory traj;
    traj.grid = grid;
    traj.species = species;
    traj.boundary = boundary;

    std::vector<double> res = residual_of(state);
    double r = linf(res);
    traj.iterates.push_back(state);
    traj.residual_norms.push_back(r);
    if (!std::isfinite(r)) {
        traj.status = NewtonStatus::Diverged;
        return traj;
    }
    if (r <= cfg.tol_residual) {
        traj.status = NewtonStatus::Converged;
        return traj;
    }

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        std::vector<double> delta;
        try {
            delta = step_of(state);
        } catch (const SingularJacobianError&) {
            traj.status = NewtonStatus::SingularJacobian;
            return traj;
        }
        for (std::size_t i = 0; i < state.size(); ++i) state[i] += cfg.damping * delta[i];
        traj.steps.push_back(std::move(delta));

        res = residual_of(state);
        r = linf(res);
        traj.iterates.push_back(state);
        traj.residual_norms.push_back(r);

        if (!std::isfinite(r) || linf(state) > cfg.divergence_cap) {
            traj.status = NewtonStatus::Diverged;
            return traj;
        }
        if (r <= cfg.tol_residual) {
            traj.status = NewtonStatus::Converged;
            return traj;
        }
    }
    traj.status = NewtonStatus::MaxIter;
    return traj;
}

} // namespace

NewtonTrajectory newton_solve(const ScalarProblem& p, const GridFunction& u0,
                              const NewtonConfig& cfg) {
    if (u0.grid != p.grid) throw std::invalid_argument("initial guess grid mismatch");
    const BoundarySpec boundary = u0.boundary;
    auto residual_of = [&p, &boundary](const std::vector<double>& state) {
        return residual(p, GridFunction(p.grid, state, boundary)).values;
    };
    auto step_of = [&p, &boundary](const std::vector<double>& state) {
        return newton_step(p, GridFunction(p.grid, state, boundary)).values;
    };
    return newton_iterate(p.grid, 1, boundary, u0.values, cfg, residual_of, step_of);
}

NewtonTrajectory newton_solve(const GrayScottProblem& p, const GridFunction& a0,
                              const GridFunction& s0, const NewtonConfig& cfg) {
    if (a0.grid != p.grid || s0.grid != p.grid) throw std::invalid_argument("initial guess grid mismatch");
    const std::size_t m = p.grid.interior_count();
    std::vector<double> state(2 * m);
    std::copy(a0.values.begin(), a0.values.end(), state.begin());
    std::copy(s0.values.begin(), s0.values.end(), state.begin() + m);

    auto split = [&](const std::vector<double>& st) {
        GridFunction a(p.grid), s(p.grid);
        std::copy(st.begin(), st.begin() + m, a.values.begin());
        std::copy(st.begin() + m, st.end(), s.values.begin());
        return std::make_pair(std::move(a), std::move(s));
    };
    auto residual_of = [&](const std::vector<double>& st) {
        const auto [a, s] = split(st);
        const auto [fa, fs] = residual_system(p, a, s);
        std::vector<double> out(2 * m);
        std::copy(fa.values.begin(), fa.values.end(), out.begin());
        std::copy(fs.values.begin(), fs.values.end(), out.begin() + m);
        return out;
    };
    auto step_of = [&](const std::vector<double>& st) {
        const auto [a, s] = split(st);
        const auto [da, ds] = newton_step(p, a, s);
        std::vector<double> out(2 * m);
        std::copy(da.values.begin(), da.values.end(), out.begin());
        std::copy(ds.values.begin(), ds.values.end(), out.begin() + m);
        return out;
    };
    return newton_iterate(p.grid, 2, BoundarySpec::zero(), std::move(state), cfg, residual_of,
                          step_of);
}

namespace {

template <typename Solution>
std::vector<Solution> dedup_and_sort(std::vector<std::optional<Solution>>& endpoints,
                                     double dedup_tol,
                                     const std::function<double(const Solution&, const Solution&)>& dist,
                                     const std::function<double(const Solution&)>& size_of) {
    std::vector<Solution> reps;
    for (auto& ep : endpoints) {
        if (!ep.has_value()) continue;
        bool duplicate = false;
        for (const auto& rep : reps) {
            if (dist(rep, *ep) < dedup_tol) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) reps.push_back(std::move(*ep));
    }
    std::stable_sort(reps.begin(), reps.end(),
                     [&](const Solution& a, const Solution& b) { return size_of(a) < size_of(b); });
    return reps;
}

} // namespace

std::vector<GridFunction> sweep_solutions(const ScalarProblem& p,
                                          const std::vector<GridFunction>& guesses,
                                          const NewtonConfig& cfg, double dedup_tol, int threads) {
    if (guesses.empty()) throw std::invalid_argument("sweep needs at least one guess");
    std::vector<std::optional<GridFunction>> endpoints(guesses.size());
    parallel_for(guesses.size(), threads, [&](std::size_t i) {
        NewtonTrajectory traj = newton_solve(p, guesses[i], cfg);
        if (traj.converged()) endpoints[i] = traj.iterate_field(traj.iterates.size() - 1);
    });
    return dedup_and_sort<GridFunction>(
        endpoints, dedup_tol,
        [](const GridFunction& a, const GridFunction& b) { return rel_l2_distance(a, b); },
        [](const GridFunction& a) { return norm(a, NormKind::L2); });
}

std::vector<std::pair<GridFunction, GridFunction>> sweep_solutions(
    const GrayScottProblem& p, const std::vector<std::pair<GridFunction, GridFunction>>& guesses,
    const NewtonConfig& cfg, double dedup_tol, int threads) {
    if (guesses.empty()) throw std::invalid_argument("sweep needs at least one guess");
    using Pair = std::pair<GridFunction, GridFunction>;
    std::vector<std::optional<Pair>> endpoints(guesses.size());
    parallel_for(guesses.size(), threads, [&](std::size_t i) {
        NewtonTrajectory traj = newton_solve(p, guesses[i].first, guesses[i].second, cfg);
        if (traj.converged()) endpoints[i] = traj.iterate_fields_gs(traj.iterates.size() - 1);
    });
    auto stacked_dist = [](const Pair& a, const Pair& b) {
        GridFunction diff_a = a.first;
        diff_a.add_scaled(b.first, -1.0);
        GridFunction diff_s = a.second;
        diff_s.add_scaled(b.second, -1.0);
        const double dist = std::hypot(norm(diff_a, NormKind::L2), norm(diff_s, NormKind::L2));
        const double na = std::hypot(norm(a.first, NormKind::L2), norm(a.second, NormKind::L2));
        const double nb = std::hypot(norm(b.first, NormKind::L2), norm(b.second, NormKind::L2));
        const double denom = std::max(na, nb);
        return denom == 0.0 ? 0.0 : dist / denom;
    };
    return dedup_and_sort<Pair>(
        endpoints, dedup_tol, stacked_dist, [](const Pair& a) {
            return std::hypot(norm(a.first, NormKind::L2), norm(a.second, NormKind::L2));
        });
}

BatchStepResult batch_newton_step(const ScalarProblem& p, const std::vector<GridFunction>& us,
                                  int threads) {
    BatchStepResult out;
    out.steps.resize(us.size());
    std::vector<char> singular(us.size(), 0);
    parallel_for(us.size(), threads, [&](std::size_t i) {
        try {
            out.steps[i] = newton_step(p, us[i]);
        } catch (const SingularJacobianError&) {
            singular[i] = 1;
        }
    });
    for (char flag : singular) out.singular_count += flag;
    return out;
}

} // namespace nopde
