#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "nopde/banded.hpp"
#include "nopde/grid.hpp"
#include "nopde/problems.hpp"

namespace nopde {

struct NewtonConfig {
    double tol_residual = 1e-10;  // Linf stopping tolerance
    int max_iter = 50;
    double divergence_cap = 1e6;  // Linf bound on iterates
    double damping = 1.0;         // step scale in (0, 1]
};

enum class NewtonStatus { Converged, MaxIter, Diverged, SingularJacobian };

const char* to_string(NewtonStatus s);

/// Full iteration record. Iterates and steps are stored as raw unknown
/// vectors: the field values for scalar problems, stacked [A; S] for
/// Gray-Scott. Steps are the undamped Newton corrections, so
/// J(u_i) step_i = -F(u_i) holds at every i.
struct NewtonTrajectory {
    NewtonStatus status = NewtonStatus::MaxIter;
    Grid grid;
    int species = 1;
    BoundarySpec boundary;
    std::vector<std::vector<double>> iterates;
    std::vector<std::vector<double>> steps;           // size() == iterates.size() - 1
    std::vector<double> residual_norms;               // Linf at each iterate

    bool converged() const { return status == NewtonStatus::Converged; }
    GridFunction iterate_field(std::size_t k) const;  // scalar problems
    GridFunction step_field(std::size_t k) const;     // zero boundary
    std::pair<GridFunction, GridFunction> iterate_fields_gs(std::size_t k) const;
};

/// J = -lap + diag(reaction') folded over the Dirichlet stencil.
/// 1D: tridiagonal. 2D: pentadiagonal structure with kl = ku = n_interior.
BandedMatrix assemble_jacobian(const ScalarProblem& p, const GridFunction& u);

/// Gray-Scott Jacobian with unknowns interleaved per node (A_i, S_i) so all
/// coupling stays inside bandwidth kl = ku = 2 n_interior + 1.
BandedMatrix assemble_jacobian(const GrayScottProblem& p, const GridFunction& a,
                               const GridFunction& s);

/// One Newton correction: solves J(u) du = -F(u). Throws
/// SingularJacobianError; the result has zero boundary.
GridFunction newton_step(const ScalarProblem& p, const GridFunction& u);
std::pair<GridFunction, GridFunction> newton_step(const GrayScottProblem& p, const GridFunction& a,
                                                  const GridFunction& s);

NewtonTrajectory newton_solve(const ScalarProblem& p, const GridFunction& u0,
                              const NewtonConfig& cfg = {});
NewtonTrajectory newton_solve(const GrayScottProblem& p, const GridFunction& a0,
                              const GridFunction& s0, const NewtonConfig& cfg = {});

/// Runs newton_solve from every guess, keeps converged endpoints and clusters
/// them by relative L2 distance < dedup_tol. Representatives are sorted by
/// ascending L2 norm. Deterministic for any thread count.
std::vector<GridFunction> sweep_solutions(const ScalarProblem& p,
                                          const std::vector<GridFunction>& guesses,
                                          const NewtonConfig& cfg = {}, double dedup_tol = 1e-4,
                                          int threads = 1);

std::vector<std::pair<GridFunction, GridFunction>> sweep_solutions(
    const GrayScottProblem& p, const std::vector<std::pair<GridFunction, GridFunction>>& guesses,
    const NewtonConfig& cfg = {}, double dedup_tol = 1e-4, int threads = 1);

/// One banded solve per input; items are independent. Failed items carry no
/// step and are flagged singular. Matches the newton_step path bitwise.
struct BatchStepResult {
    std::vector<std::optional<GridFunction>> steps;
    int singular_count = 0;
};

BatchStepResult batch_newton_step(const ScalarProblem& p, const std::vector<GridFunction>& us,
                                  int threads = 1);

} // namespace nopde
