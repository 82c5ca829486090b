#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nopde {

/// Uniform tensor grid of interior points on the unit interval/square.
/// Spacing is h = 1/(n_interior + 1) exactly; interior point i along an axis
/// sits at (i + 1) * h.
struct Grid {
    int dim = 1;
    int n_interior = 1;
    double h = 0.5;

    static Grid make_1d(int n_interior);
    static Grid make_2d(int n_interior);

    std::size_t interior_count() const {
        const std::size_t n = static_cast<std::size_t>(n_interior);
        return dim == 1 ? n : n * n;
    }
    double coord(int i) const { return (i + 1) * h; }

    bool operator==(const Grid&) const = default;
};

/// Dirichlet trace data: identically zero or one constant per side.
/// Side order: 1D {x=0, x=1}; 2D {x=0, x=1, y=0, y=1}.
struct BoundarySpec {
    enum class Kind : std::uint8_t { Zero = 0, PerSide = 1 };

    Kind kind = Kind::Zero;
    std::array<double, 4> side{0.0, 0.0, 0.0, 0.0};

    static BoundarySpec zero() { return {}; }
    static BoundarySpec per_side_1d(double x_lo, double x_hi) {
        return {Kind::PerSide, {x_lo, x_hi, 0.0, 0.0}};
    }
    static BoundarySpec per_side_2d(double x_lo, double x_hi, double y_lo, double y_hi) {
        return {Kind::PerSide, {x_lo, x_hi, y_lo, y_hi}};
    }

    bool is_zero() const;
    bool operator==(const BoundarySpec&) const = default;
};

/// Field values at interior grid points (row-major in 2D, x fastest) plus
/// the Dirichlet trace used when a stencil reaches past the interior.
struct GridFunction {
    Grid grid;
    std::vector<double> values;
    BoundarySpec boundary;

    GridFunction() = default;
    explicit GridFunction(Grid g, BoundarySpec b = BoundarySpec::zero());
    GridFunction(Grid g, std::vector<double> vals, BoundarySpec b = BoundarySpec::zero());

    double& at(int ix) { return values[static_cast<std::size_t>(ix)]; }
    double at(int ix) const { return values[static_cast<std::size_t>(ix)]; }
    double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * grid.n_interior + ix]; }
    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * grid.n_interior + ix]; }

    bool all_finite() const;

    GridFunction& add_scaled(const GridFunction& other, double factor);
    GridFunction& scale(double factor);
};

enum class NormKind { L2, H1, H2, Linf };

/// Discrete Laplacian with Dirichlet data folded in: 1D second difference,
/// 2D five-point stencil, both scaled by 1/h^2. The result carries a zero
/// boundary (it is a derived interior field).
GridFunction laplacian(const GridFunction& u);

/// Discrete Laplacian with replicate padding (homogeneous Neumann); the
/// field's Dirichlet spec is ignored.
GridFunction laplacian_replicate(const GridFunction& u);

/// Discrete norms. L2 = sqrt(h^dim sum u^2); H1 adds forward-difference
/// gradient energy with zero extension past the last interior point; H2 adds
/// the L2 energy of the stencil Laplacian; Linf is the max magnitude.
double norm(const GridFunction& u, NormKind kind);

double linf(std::span<const double> v);

/// Relative L2 distance ||a-b|| / max(||a||, ||b||); zero when both are zero.
double rel_l2_distance(const GridFunction& a, const GridFunction& b);

int sensor_count_per_axis(const Grid& grid, int stride);

/// Every stride-th interior value per axis in row-major order; the branch
/// network input. stride must be 1 or smaller than n_interior.
std::vector<double> sample_sensors(const GridFunction& u, int stride);

/// Interior point coordinates packed per point (x; or x,y row-major).
std::vector<double> grid_coords(const Grid& grid);

/// "NOGF" binary layout: magic, u8 dim, u32 n_interior, values, boundary tag
/// (+ per-side constants when tagged).
void save_grid_function(const std::string& path, const GridFunction& u);
GridFunction load_grid_function(const std::string& path);
void append_grid_function(class ByteWriter& w, const GridFunction& u);
GridFunction read_grid_function(class ByteReader& r);

} // namespace nopde
