#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "nopde/newton.hpp"
#include "nopde/problems.hpp"
#include "nopde/rng.hpp"

using namespace nopde;

namespace {

GridFunction affine_sine(const ScalarProblem& p, double a) {
    GridFunction u(p.grid, p.boundary);
    for (int i = 0; i < p.grid.n_interior; ++i) {
        const double x = p.grid.coord(i);
        u.at(i) = x + a * std::sin(std::numbers::pi * x);
    }
    return u;
}

GridFunction sine2d(const ScalarProblem& p, double c) {
    GridFunction u(p.grid);
    for (int iy = 0; iy < p.grid.n_interior; ++iy) {
        for (int ix = 0; ix < p.grid.n_interior; ++ix) {
            u.at(ix, iy) = c * std::sin(std::numbers::pi * p.grid.coord(ix)) *
                           std::sin(std::numbers::pi * p.grid.coord(iy));
        }
    }
    return u;
}

} // namespace

TEST_CASE("1d jacobian assembly at u=0, n=3") {
    // h = 1/4: diagonal 2/h^2 = 32, off-diagonals -1/h^2 = -16.
    const ScalarProblem p = make_example1d(3);
    const GridFunction u(p.grid, p.boundary);
    const BandedMatrix jac = assemble_jacobian(p, u);
    for (int i = 0; i < 3; ++i) CHECK(jac.get(i, i) == doctest::Approx(32.0));
    CHECK(jac.get(0, 1) == doctest::Approx(-16.0));
    CHECK(jac.get(1, 0) == doctest::Approx(-16.0));
    CHECK(jac.get(1, 2) == doctest::Approx(-16.0));
    CHECK(jac.get(0, 2) == 0.0);
}

TEST_CASE("linear problems converge in exactly one iteration") {
    const Grid g = Grid::make_1d(31);
    GridFunction source(g);
    for (int i = 0; i < g.n_interior; ++i) source.at(i) = std::sin(2.0 * std::numbers::pi * g.coord(i));
    const ScalarProblem p{g, Reaction::zero(), source, BoundarySpec::zero(), "example1d", {}};

    Rng rng(4);
    const GridFunction u0 = testhelpers::random_field(rng, g, 5.0);
    const NewtonTrajectory traj = newton_solve(p, u0);
    CHECK(traj.converged());
    CHECK(traj.steps.size() == 1);
    CHECK(traj.residual_norms.back() <= 1e-10);
}

TEST_CASE("example1d converges from the affine start") {
    const ScalarProblem p = make_example1d(255);
    const NewtonTrajectory traj = newton_solve(p, affine_sine(p, 0.0));
    CHECK(traj.converged());
    CHECK(traj.iterates.size() <= 21);
    CHECK(traj.residual_norms.back() <= 1e-10);

    // Step correctness at every iterate: J(u_i) du_i = -F(u_i).
    for (std::size_t k = 0; k < traj.steps.size(); ++k) {
        const GridFunction u = traj.iterate_field(k);
        const BandedMatrix jac = assemble_jacobian(p, u);
        const GridFunction f = residual(p, u);
        std::vector<double> check(f.values.size());
        jac.matvec(traj.steps[k], check);
        double worst = 0.0;
        for (std::size_t i = 0; i < check.size(); ++i) {
            worst = std::max(worst, std::fabs(check[i] + f.values[i]));
        }
        CHECK(worst <= 1e-8 * (1.0 + linf(f.values)));
    }
}

TEST_CASE("restarting at a solution is a fixed point") {
    const ScalarProblem p = make_example1d(127);
    const NewtonTrajectory traj = newton_solve(p, affine_sine(p, 0.0));
    REQUIRE(traj.converged());
    const GridFunction sol = traj.iterate_field(traj.iterates.size() - 1);
    const NewtonTrajectory again = newton_solve(p, sol);
    CHECK(again.converged());
    CHECK(again.steps.size() <= 1);
    const GridFunction end = again.iterate_field(again.iterates.size() - 1);
    CHECK(rel_l2_distance(sol, end) < 1e-9);
}

TEST_CASE("quadratic convergence tail on example1d") {
    const ScalarProblem p = make_example1d(255);
    const NewtonTrajectory traj = newton_solve(p, affine_sine(p, 10.0));
    REQUIRE(traj.converged());
    double c_max = 0.0;
    int pairs = 0;
    for (std::size_t k = 0; k + 1 < traj.residual_norms.size(); ++k) {
        const double rk = traj.residual_norms[k];
        const double rk1 = traj.residual_norms[k + 1];
        if (rk < 1e-2 && rk > 0.0) {
            c_max = std::max(c_max, rk1 / (rk * rk));
            ++pairs;
        }
    }
    CHECK(pairs >= 1);
    CHECK(std::isfinite(c_max));
}

TEST_CASE("divergence and max-iter statuses") {
    const ScalarProblem p = make_nonconvex2d(9, 1600.0);
    NewtonConfig cfg;
    cfg.max_iter = 3;
    const NewtonTrajectory traj = newton_solve(p, sine2d(p, 1.0), cfg);
    CHECK((traj.status == NewtonStatus::MaxIter || traj.status == NewtonStatus::Diverged ||
           traj.status == NewtonStatus::Converged));
    CHECK(traj.steps.size() == traj.iterates.size() - 1);
    CHECK(traj.residual_norms.size() == traj.iterates.size());
}

TEST_CASE("sweep finds the two example1d solutions and dedups") {
    const ScalarProblem p = make_example1d(127);
    std::vector<GridFunction> guesses;
    for (double a = -40.0; a <= 40.0 + 1e-9; a += 10.0) guesses.push_back(affine_sine(p, a));
    const auto sols = sweep_solutions(p, guesses, {}, 1e-4, 2);
    CHECK(sols.size() == 2);
    CHECK(rel_l2_distance(sols[0], sols[1]) > 1e-2);
    CHECK(norm(sols[0], NormKind::L2) < norm(sols[1], NormKind::L2));
    for (const auto& sol : sols) CHECK(linf(residual(p, sol).values) <= 1e-10);

    // All guesses already at one solution collapse to a single entry.
    const auto single = sweep_solutions(p, {sols[0], sols[0], sols[0]}, {}, 1e-4, 1);
    CHECK(single.size() == 1);
}

TEST_CASE("sweep is deterministic across thread counts") {
    const ScalarProblem p = make_example1d(63);
    std::vector<GridFunction> guesses;
    for (double a = -30.0; a <= 30.0 + 1e-9; a += 15.0) guesses.push_back(affine_sine(p, a));
    const auto seq = sweep_solutions(p, guesses, {}, 1e-4, 1);
    const auto par = sweep_solutions(p, guesses, {}, 1e-4, 4);
    REQUIRE(seq.size() == par.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        CHECK(seq[i].values == par[i].values);
    }
}

TEST_CASE("batch steps match the single-step path bitwise") {
    const ScalarProblem p = make_nonconvex2d(9);
    Rng rng(8);
    std::vector<GridFunction> us;
    for (int i = 0; i < 5; ++i) us.push_back(testhelpers::random_field(rng, p.grid, 2.0));

    const BatchStepResult batch = batch_newton_step(p, us, 2);
    CHECK(batch.steps.size() == 5);
    CHECK(batch.singular_count == 0);
    for (std::size_t i = 0; i < us.size(); ++i) {
        const GridFunction single = newton_step(p, us[i]);
        REQUIRE(batch.steps[i].has_value());
        CHECK(batch.steps[i]->values == single.values);
    }

    CHECK(batch_newton_step(p, {}, 1).steps.empty());
    const BatchStepResult one = batch_newton_step(p, {us[0]}, 1);
    CHECK(one.steps.size() == 1);
}

TEST_CASE("banded jacobian path equals dense oracle on small grids") {
    Rng rng(23);
    for (const ScalarProblem& p :
         {make_example1d(9), make_convex2d(5), make_nonconvex2d(5)}) {
        const GridFunction u = testhelpers::random_field(rng, p.grid, 1.0, p.boundary);
        const GridFunction f = residual(p, u);
        std::vector<double> rhs(f.values.size());
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -f.values[i];

        const BandedMatrix jac = assemble_jacobian(p, u);
        const int n = jac.order();
        std::vector<double> dense(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) dense[static_cast<std::size_t>(i) * n + j] = jac.get(i, j);
        }
        const auto x_band = banded_lu_solve(jac, rhs);
        const auto x_dense = testhelpers::dense_solve(dense, rhs);
        CHECK(testhelpers::max_rel_diff(x_band, x_dense, 1e-8) < 1e-10);
    }
}

TEST_CASE("gray-scott newton honors the trivial fixed point") {
    const GrayScottProblem p = make_grayscott(6);
    GridFunction a(p.grid), s(p.grid);
    for (auto& v : s.values) v = 1.0;
    const NewtonTrajectory at_solution = newton_solve(p, a, s);
    CHECK(at_solution.converged());
    CHECK(at_solution.steps.size() <= 1);

    // A tiny perturbation stays in the basin of (A, S) = (0, 1).
    Rng rng(3);
    GridFunction ap = a, sp = s;
    for (auto& v : ap.values) v += 1e-8 * rng.uniform01();
    for (auto& v : sp.values) v -= 1e-8 * rng.uniform01();
    const NewtonTrajectory traj = newton_solve(p, ap, sp);
    CHECK(traj.converged());
    const auto [af, sf] = traj.iterate_fields_gs(traj.iterates.size() - 1);
    CHECK(norm(af, NormKind::Linf) < 1e-5);
    CHECK(sf.values[0] == doctest::Approx(1.0).epsilon(1e-5));
}
