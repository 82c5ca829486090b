#include "nopde/export.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nopde/serialize.hpp"

namespace nopde {

void write_trajectory_csv(const std::string& path, const NewtonTrajectory& traj) {
    std::ostringstream out;
    out << "iter,residual_linf,step_l2\n";
    const double hd = (traj.grid.dim == 1) ? traj.grid.h : traj.grid.h * traj.grid.h;
    for (std::size_t k = 0; k < traj.iterates.size(); ++k) {
        double step_l2 = 0.0;
        if (k < traj.steps.size()) {
            double sq = 0.0;
            for (double v : traj.steps[k]) sq += v * v;
            step_l2 = std::sqrt(sq * hd);
        }
        out << k << ',' << format_double(traj.residual_norms[k]) << ',' << format_double(step_l2)
            << '\n';
    }
    write_text_file(path, out.str());
}

void write_pgm_with_sidecar(const std::string& path, const GridFunction& field) {
    if (field.grid.dim != 2) throw std::invalid_argument("pgm export needs a 2D field");
    const int n = field.grid.n_interior;
    const auto [lo_it, hi_it] = std::minmax_element(field.values.begin(), field.values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double span = hi - lo;

    std::string bytes;
    {
        std::ostringstream header;
        header << "P5\n" << n << ' ' << n << "\n255\n";
        bytes = header.str();
    }
    bytes.reserve(bytes.size() + static_cast<std::size_t>(n) * n);
    // Image rows run top to bottom; grid rows run bottom to top in y.
    for (int iy = n - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double v = field.at(ix, iy);
            const double scaled = span > 0.0 ? (v - lo) / span : 0.0;
            bytes.push_back(static_cast<char>(
                static_cast<unsigned char>(std::lround(scaled * 255.0))));
        }
    }
    write_file(path, bytes);

    std::ostringstream side;
    side << "min=" << format_double(lo) << "\n";
    side << "max=" << format_double(hi) << "\n";
    side << "rows_top_to_bottom=y_decreasing\n";
    write_text_file(path + ".scale", side.str());
}

} // namespace nopde
