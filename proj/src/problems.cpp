#include "nopde/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nopde {

double Reaction::value(double u) const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::USquared: return u * u;
        case Kind::NegUSquared: return -u * u;
        case Kind::Polynomial: {
            double acc = 0.0;
            for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * u + coeffs[k];
            return acc;
        }
    }
    return 0.0;
}

double Reaction::deriv(double u) const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::USquared: return 2.0 * u;
        case Kind::NegUSquared: return -2.0 * u;
        case Kind::Polynomial: {
            double acc = 0.0;
            for (std::size_t k = coeffs.size(); k-- > 1;) acc = acc * u + k * coeffs[k];
            return acc;
        }
    }
    return 0.0;
}

ScalarProblem make_example1d(int n_interior) {
    const Grid g = Grid::make_1d(n_interior);
    ScalarProblem p{g, Reaction::u_squared(), GridFunction(g), BoundarySpec::per_side_1d(0.0, 1.0),
                    "example1d", {}};
    return p;
}

ScalarProblem make_convex2d(int n_interior) {
    const Grid g = Grid::make_2d(n_interior);
    GridFunction src(g);
    for (int iy = 0; iy < g.n_interior; ++iy) {
        for (int ix = 0; ix < g.n_interior; ++ix) {
            src.at(ix, iy) = -std::sin(5.0 * std::numbers::pi * (g.coord(ix) + g.coord(iy)));
        }
    }
    return {g, Reaction::u_squared(), std::move(src), BoundarySpec::zero(), "convex2d", {}};
}

ScalarProblem make_nonconvex2d(int n_interior, double s) {
    const Grid g = Grid::make_2d(n_interior);
    GridFunction src(g);
    for (int iy = 0; iy < g.n_interior; ++iy) {
        for (int ix = 0; ix < g.n_interior; ++ix) {
            src.at(ix, iy) =
                s * std::sin(std::numbers::pi * g.coord(ix)) * std::sin(std::numbers::pi * g.coord(iy));
        }
    }
    return {g, Reaction::neg_u_squared(), std::move(src), BoundarySpec::zero(), "nonconvex2d", {s}};
}

namespace {

void check_grid(const ScalarProblem& p, const GridFunction& u) {
    if (u.grid != p.grid) throw std::invalid_argument("field grid does not match problem grid");
}

} // namespace

GridFunction residual(const ScalarProblem& p, const GridFunction& u) {
    check_grid(p, u);
    GridFunction out = laplacian(u);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = -out.values[i] + p.reaction.value(u.values[i]) + p.source.values[i];
    }
    return out;
}

GridFunction jacobian_diag(const ScalarProblem& p, const GridFunction& u) {
    check_grid(p, u);
    GridFunction out(p.grid);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = p.reaction.deriv(u.values[i]);
    }
    return out;
}

ScalarProblem scalar_problem_from_tag(const std::string& tag, const std::vector<double>& params,
                                      int n_interior) {
    if (tag == "example1d") return make_example1d(n_interior);
    if (tag == "convex2d") return make_convex2d(n_interior);
    if (tag == "nonconvex2d") {
        return make_nonconvex2d(n_interior, params.empty() ? 1600.0 : params[0]);
    }
    throw std::invalid_argument("not a scalar catalog problem: " + tag);
}

GrayScottProblem make_grayscott(int n_interior, double d_a, double d_s, double mu, double rho) {
    if (d_a <= 0.0 || d_s <= 0.0) throw std::invalid_argument("diffusion coefficients must be positive");
    if (mu < 0.0 || rho < 0.0) throw std::invalid_argument("rate constants must be non-negative");
    return {Grid::make_2d(n_interior), d_a, d_s, mu, rho};
}

namespace {

void check_grid(const GrayScottProblem& p, const GridFunction& a, const GridFunction& s) {
    if (a.grid != p.grid || s.grid != p.grid) {
        throw std::invalid_argument("species grid does not match problem grid");
    }
}

} // namespace

std::pair<GridFunction, GridFunction> residual_system(const GrayScottProblem& p,
                                                      const GridFunction& a,
                                                      const GridFunction& s) {
    check_grid(p, a, s);
    GridFunction fa = laplacian_replicate(a);
    GridFunction fs = laplacian_replicate(s);
    for (std::size_t i = 0; i < fa.values.size(); ++i) {
        const double av = a.values[i];
        const double sv = s.values[i];
        fa.values[i] = p.d_a * fa.values[i] - sv * av * av + (p.mu + p.rho) * av;
        fs.values[i] = p.d_s * fs.values[i] + sv * av * av - p.rho * (1.0 - sv);
    }
    return {std::move(fa), std::move(fs)};
}

GrayScottJacobianDiag jacobian_blocks(const GrayScottProblem& p, const GridFunction& a,
                                      const GridFunction& s) {
    check_grid(p, a, s);
    GrayScottJacobianDiag out{GridFunction(p.grid), GridFunction(p.grid), GridFunction(p.grid),
                              GridFunction(p.grid)};
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double av = a.values[i];
        const double sv = s.values[i];
        out.d_aa.values[i] = -2.0 * sv * av + p.mu + p.rho;
        out.d_as.values[i] = -av * av;
        out.d_sa.values[i] = 2.0 * sv * av;
        out.d_ss.values[i] = av * av + p.rho;
    }
    return out;
}

} // namespace nopde
