#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nopde/grid.hpp"

namespace nopde {

/// Pointwise reaction term with closed-form value and derivative.
struct Reaction {
    enum class Kind : std::uint8_t { Zero = 0, USquared = 1, NegUSquared = 2, Polynomial = 3 };

    Kind kind = Kind::Zero;
    std::vector<double> coeffs;  // Polynomial: sum coeffs[k] * u^k

    static Reaction zero() { return {}; }
    static Reaction u_squared() { return {Kind::USquared, {}}; }
    static Reaction neg_u_squared() { return {Kind::NegUSquared, {}}; }
    static Reaction polynomial(std::vector<double> c) { return {Kind::Polynomial, std::move(c)}; }

    double value(double u) const;
    double deriv(double u) const;
};

/// Scalar problem F(u) = -lap(u) + reaction(u) + source = 0 with Dirichlet
/// boundary data; the Newton system solves J du = -F with J = -lap + diag(r').
struct ScalarProblem {
    Grid grid;
    Reaction reaction;
    GridFunction source;
    BoundarySpec boundary;
    std::string tag;              // catalog name used in file headers
    std::vector<double> params;   // catalog parameters written with datasets
};

/// -u'' + u^2 = 0 on (0,1), u(0)=0, u(1)=1.
ScalarProblem make_example1d(int n_interior);

/// -lap u + u^2 - sin(5 pi (x+y)) = 0 on the unit square, zero boundary.
ScalarProblem make_convex2d(int n_interior);

/// -lap u - u^2 + s sin(pi x) sin(pi y) = 0, zero boundary. Default s=1600.
ScalarProblem make_nonconvex2d(int n_interior, double s = 1600.0);

GridFunction residual(const ScalarProblem& p, const GridFunction& u);
GridFunction jacobian_diag(const ScalarProblem& p, const GridFunction& u);

/// Two-species steady reaction-diffusion system with replicate-padding
/// (homogeneous Neumann) stencils:
///   F_A = D_A lap A - S A^2 + (mu + rho) A
///   F_S = D_S lap S + S A^2 - rho (1 - S)
struct GrayScottProblem {
    Grid grid;  // 2D
    double d_a = 2.5e-4;
    double d_s = 5.0e-4;
    double mu = 0.065;
    double rho = 0.04;
};

GrayScottProblem make_grayscott(int n_interior = 63, double d_a = 2.5e-4, double d_s = 5.0e-4,
                                double mu = 0.065, double rho = 0.04);

/// Rebuilds a catalog scalar problem from the (tag, params, n) triple stored
/// in dataset and checkpoint headers. Throws on "grayscott" or unknown tags.
ScalarProblem scalar_problem_from_tag(const std::string& tag, const std::vector<double>& params,
                                      int n_interior);

std::pair<GridFunction, GridFunction> residual_system(const GrayScottProblem& p,
                                                      const GridFunction& a,
                                                      const GridFunction& s);

/// Reaction parts of the four Jacobian blocks of dF/d(A,S), as diagonal
/// fields. The diffusion parts are +D_A lap and +D_S lap on the A-A and S-S
/// blocks respectively.
struct GrayScottJacobianDiag {
    GridFunction d_aa;  // -2 S A + mu + rho
    GridFunction d_as;  // -A^2
    GridFunction d_sa;  // 2 S A
    GridFunction d_ss;  // A^2 + rho
};

GrayScottJacobianDiag jacobian_blocks(const GrayScottProblem& p, const GridFunction& a,
                                      const GridFunction& s);

} // namespace nopde
