#include "nopde/grid.hpp"

#include <cmath>
#include <stdexcept>

#include "nopde/serialize.hpp"

namespace nopde {

Grid Grid::make_1d(int n_interior) {
    if (n_interior < 1) throw std::invalid_argument("grid needs at least one interior point");
    return {1, n_interior, 1.0 / (n_interior + 1)};
}

Grid Grid::make_2d(int n_interior) {
    if (n_interior < 1) throw std::invalid_argument("grid needs at least one interior point");
    return {2, n_interior, 1.0 / (n_interior + 1)};
}

bool BoundarySpec::is_zero() const {
    if (kind == Kind::Zero) return true;
    for (double v : side) {
        if (v != 0.0) return false;
    }
    return true;
}

GridFunction::GridFunction(Grid g, BoundarySpec b)
    : grid(g), values(g.interior_count(), 0.0), boundary(b) {}

GridFunction::GridFunction(Grid g, std::vector<double> vals, BoundarySpec b)
    : grid(g), values(std::move(vals)), boundary(b) {
    if (values.size() != grid.interior_count()) {
        throw std::invalid_argument("value count does not match grid interior count");
    }
}

bool GridFunction::all_finite() const {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

GridFunction& GridFunction::add_scaled(const GridFunction& other, double factor) {
    if (other.grid != grid) throw std::invalid_argument("grid mismatch in add_scaled");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += factor * other.values[i];
    return *this;
}

GridFunction& GridFunction::scale(double factor) {
    for (double& v : values) v *= factor;
    return *this;
}

namespace {

// Dirichlet neighbor lookup: boundary constant for the side the stencil
// crosses, interior value otherwise.
inline double side_value(const BoundarySpec& b, int side) {
    return b.kind == BoundarySpec::Kind::Zero ? 0.0 : b.side[static_cast<std::size_t>(side)];
}

} // namespace

GridFunction laplacian(const GridFunction& u) {
    const Grid& g = u.grid;
    if (u.values.size() != g.interior_count()) {
        throw std::invalid_argument("laplacian: value/grid shape mismatch");
    }
    const int n = g.n_interior;
    const double inv_h2 = 1.0 / (g.h * g.h);
    GridFunction out(g, BoundarySpec::zero());
    // Grouped differences: neighbor gaps of smooth fields subtract exactly
    // (Sterbenz), which keeps the rounding floor near eps/h instead of
    // eps/h^2 on fine grids.
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) {
            const double left = (i > 0) ? u.at(i - 1) : side_value(u.boundary, 0);
            const double right = (i < n - 1) ? u.at(i + 1) : side_value(u.boundary, 1);
            const double c = u.at(i);
            out.at(i) = ((right - c) - (c - left)) * inv_h2;
        }
    } else {
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                const double left = (ix > 0) ? u.at(ix - 1, iy) : side_value(u.boundary, 0);
                const double right = (ix < n - 1) ? u.at(ix + 1, iy) : side_value(u.boundary, 1);
                const double down = (iy > 0) ? u.at(ix, iy - 1) : side_value(u.boundary, 2);
                const double up = (iy < n - 1) ? u.at(ix, iy + 1) : side_value(u.boundary, 3);
                const double c = u.at(ix, iy);
                out.at(ix, iy) = (((right - c) - (c - left)) + ((up - c) - (c - down))) * inv_h2;
            }
        }
    }
    return out;
}

GridFunction laplacian_replicate(const GridFunction& u) {
    const Grid& g = u.grid;
    const int n = g.n_interior;
    const double inv_h2 = 1.0 / (g.h * g.h);
    GridFunction out(g, BoundarySpec::zero());
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) {
            const double left = u.at(i > 0 ? i - 1 : 0);
            const double right = u.at(i < n - 1 ? i + 1 : n - 1);
            const double c = u.at(i);
            out.at(i) = ((right - c) - (c - left)) * inv_h2;
        }
    } else {
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                const double left = u.at(ix > 0 ? ix - 1 : 0, iy);
                const double right = u.at(ix < n - 1 ? ix + 1 : n - 1, iy);
                const double down = u.at(ix, iy > 0 ? iy - 1 : 0);
                const double up = u.at(ix, iy < n - 1 ? iy + 1 : n - 1);
                const double c = u.at(ix, iy);
                out.at(ix, iy) = (((right - c) - (c - left)) + ((up - c) - (c - down))) * inv_h2;
            }
        }
    }
    return out;
}

namespace {

double grad_energy_forward(const GridFunction& u) {
    // Forward differences with zero extension past the last interior point.
    const Grid& g = u.grid;
    const int n = g.n_interior;
    const double inv_h = 1.0 / g.h;
    double sum = 0.0;
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) {
            const double next = (i < n - 1) ? u.at(i + 1) : 0.0;
            const double d = (next - u.at(i)) * inv_h;
            sum += d * d;
        }
    } else {
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                const double nx = (ix < n - 1) ? u.at(ix + 1, iy) : 0.0;
                const double ny = (iy < n - 1) ? u.at(ix, iy + 1) : 0.0;
                const double dx = (nx - u.at(ix, iy)) * inv_h;
                const double dy = (ny - u.at(ix, iy)) * inv_h;
                sum += dx * dx + dy * dy;
            }
        }
    }
    return sum;
}

} // namespace

double norm(const GridFunction& u, NormKind kind) {
    const double hd = (u.grid.dim == 1) ? u.grid.h : u.grid.h * u.grid.h;
    if (kind == NormKind::Linf) return linf(u.values);
    double sq = 0.0;
    for (double v : u.values) sq += v * v;
    sq *= hd;
    if (kind == NormKind::L2) return std::sqrt(sq);
    sq += hd * grad_energy_forward(u);
    if (kind == NormKind::H1) return std::sqrt(sq);
    const GridFunction lap = laplacian(u);
    double lap_sq = 0.0;
    for (double v : lap.values) lap_sq += v * v;
    return std::sqrt(sq + hd * lap_sq);
}

double linf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

double rel_l2_distance(const GridFunction& a, const GridFunction& b) {
    if (a.grid != b.grid) throw std::invalid_argument("grid mismatch in rel_l2_distance");
    GridFunction diff = a;
    diff.add_scaled(b, -1.0);
    const double na = norm(a, NormKind::L2);
    const double nb = norm(b, NormKind::L2);
    const double denom = std::max(na, nb);
    if (denom == 0.0) return 0.0;
    return norm(diff, NormKind::L2) / denom;
}

int sensor_count_per_axis(const Grid& grid, int stride) {
    return (grid.n_interior - 1) / stride + 1;
}

std::vector<double> sample_sensors(const GridFunction& u, int stride) {
    const int n = u.grid.n_interior;
    if (stride < 1) throw std::invalid_argument("sensor stride must be positive");
    if (stride != 1 && stride >= n) {
        throw std::invalid_argument("sensor stride larger than grid");
    }
    std::vector<double> out;
    if (u.grid.dim == 1) {
        out.reserve(static_cast<std::size_t>(sensor_count_per_axis(u.grid, stride)));
        for (int i = 0; i < n; i += stride) out.push_back(u.at(i));
    } else {
        const std::size_t c = static_cast<std::size_t>(sensor_count_per_axis(u.grid, stride));
        out.reserve(c * c);
        for (int iy = 0; iy < n; iy += stride) {
            for (int ix = 0; ix < n; ix += stride) out.push_back(u.at(ix, iy));
        }
    }
    return out;
}

std::vector<double> grid_coords(const Grid& grid) {
    std::vector<double> out;
    const int n = grid.n_interior;
    if (grid.dim == 1) {
        out.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) out.push_back(grid.coord(i));
    } else {
        out.reserve(2 * grid.interior_count());
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                out.push_back(grid.coord(ix));
                out.push_back(grid.coord(iy));
            }
        }
    }
    return out;
}

void append_grid_function(ByteWriter& w, const GridFunction& u) {
    w.magic("NOGF");
    w.u8(static_cast<std::uint8_t>(u.grid.dim));
    w.u32(static_cast<std::uint32_t>(u.grid.n_interior));
    w.f64_array(u.values);
    w.u8(static_cast<std::uint8_t>(u.boundary.kind));
    if (u.boundary.kind == BoundarySpec::Kind::PerSide) {
        const int sides = 2 * u.grid.dim;
        for (int s = 0; s < sides; ++s) w.f64(u.boundary.side[static_cast<std::size_t>(s)]);
    }
}

GridFunction read_grid_function(ByteReader& r) {
    r.expect_magic("NOGF");
    const int dim = r.u8();
    if (dim != 1 && dim != 2) throw IoError("grid function: unsupported dim");
    const int n = static_cast<int>(r.u32());
    Grid grid = (dim == 1) ? Grid::make_1d(n) : Grid::make_2d(n);
    std::vector<double> values = r.f64_array(grid.interior_count());
    const std::uint8_t tag = r.u8();
    BoundarySpec b;
    if (tag == 0) {
        b = BoundarySpec::zero();
    } else if (tag == 1) {
        b.kind = BoundarySpec::Kind::PerSide;
        for (int s = 0; s < 2 * dim; ++s) b.side[static_cast<std::size_t>(s)] = r.f64();
    } else {
        throw IoError("grid function: unknown boundary tag");
    }
    return GridFunction(grid, std::move(values), b);
}

void save_grid_function(const std::string& path, const GridFunction& u) {
    ByteWriter w;
    append_grid_function(w, u);
    write_file(path, w.bytes());
}

GridFunction load_grid_function(const std::string& path) {
    const std::string data = read_file(path);
    ByteReader r(data);
    return read_grid_function(r);
}

} // namespace nopde
