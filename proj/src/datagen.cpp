#include "nopde/datagen.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nopde/errors.hpp"
#include "nopde/parallel.hpp"
#include "nopde/serialize.hpp"

namespace nopde {

GridFunction random_polynomial_field(Rng& rng, int degree, double bound, const Grid& grid) {
    if (grid.dim != 1) throw std::invalid_argument("polynomial recipe is 1D-only");
    if (degree < 0 || bound <= 0.0) throw std::invalid_argument("need degree >= 0 and bound > 0");
    std::vector<double> coeffs(static_cast<std::size_t>(degree) + 1);
    for (auto& c : coeffs) c = rng.uniform(-bound, bound);
    GridFunction out(grid);
    for (int i = 0; i < grid.n_interior; ++i) {
        const double x = grid.coord(i);
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
        out.at(i) = acc;
    }
    return out;
}

GridFunction spectral_gaussian_field(Rng& rng, const Grid& grid, double delta, int modes,
                                     double decay_power) {
    if (grid.dim != 2) throw std::invalid_argument("spectral recipe is 2D-only");
    if (modes < 1 || delta <= 0.0) throw std::invalid_argument("need modes >= 1 and delta > 0");
    const int n = grid.n_interior;
    const double sigma = std::sqrt(delta);

    // Weighted coefficients xi_ij (i^2+j^2)^-decay, i-major draw order.
    std::vector<double> coeff(static_cast<std::size_t>(modes) * modes);
    for (int i = 1; i <= modes; ++i) {
        for (int j = 1; j <= modes; ++j) {
            const double weight = std::pow(static_cast<double>(i * i + j * j), -decay_power);
            coeff[static_cast<std::size_t>(i - 1) * modes + (j - 1)] = sigma * rng.normal() * weight;
        }
    }

    // Sine table: sines[(k-1)*n + a] = sin(k pi x_a).
    std::vector<double> sines(static_cast<std::size_t>(modes) * n);
    for (int k = 1; k <= modes; ++k) {
        for (int a = 0; a < n; ++a) {
            sines[static_cast<std::size_t>(k - 1) * n + a] =
                std::sin(k * std::numbers::pi * grid.coord(a));
        }
    }

    // v(x,y) = sin_x(x)^T C sin_y(y), evaluated as T = C^T sin_x, then rows.
    std::vector<double> t(static_cast<std::size_t>(modes) * n, 0.0);  // t[j-1][ix]
    for (int i = 1; i <= modes; ++i) {
        for (int j = 1; j <= modes; ++j) {
            const double c = coeff[static_cast<std::size_t>(i - 1) * modes + (j - 1)];
            if (c == 0.0) continue;
            const double* sx = sines.data() + static_cast<std::size_t>(i - 1) * n;
            double* tj = t.data() + static_cast<std::size_t>(j - 1) * n;
            for (int ix = 0; ix < n; ++ix) tj[ix] += c * sx[ix];
        }
    }
    GridFunction out(grid);
    for (int iy = 0; iy < n; ++iy) {
        for (int j = 1; j <= modes; ++j) {
            const double sy = sines[static_cast<std::size_t>(j - 1) * n + iy];
            const double* tj = t.data() + static_cast<std::size_t>(j - 1) * n;
            for (int ix = 0; ix < n; ++ix) out.at(ix, iy) += sy * tj[ix];
        }
    }
    return out;
}

GridFunction uniform01_field(Rng& rng, const Grid& grid) {
    GridFunction out(grid);
    for (auto& v : out.values) v = rng.uniform01();
    return out;
}

const char* to_string(RecipeKind k) {
    switch (k) {
        case RecipeKind::Polynomial: return "polynomial";
        case RecipeKind::Spectral: return "spectral";
        case RecipeKind::RawSpectral3: return "raw-spectral3";
        case RecipeKind::Uniform01: return "uniform01";
    }
    return "unknown";
}

RecipeKind recipe_from_string(const std::string& name) {
    if (name == "polynomial") return RecipeKind::Polynomial;
    if (name == "spectral") return RecipeKind::Spectral;
    if (name == "raw-spectral3") return RecipeKind::RawSpectral3;
    if (name == "uniform01") return RecipeKind::Uniform01;
    throw ConfigError("unknown recipe: " + name);
}

namespace {

constexpr double kStepResidualScale = 1e-8;

bool step_is_valid(const BandedMatrix& jac, std::span<const double> du,
                   std::span<const double> f) {
    std::vector<double> check(du.size());
    jac.matvec(du, check);
    double worst = 0.0;
    for (std::size_t i = 0; i < check.size(); ++i) {
        worst = std::max(worst, std::fabs(check[i] + f[i]));
        if (!std::isfinite(du[i])) return false;
    }
    return worst <= kStepResidualScale * (1.0 + linf(f));
}

struct SeriesResult {
    bool ok = false;
    std::vector<DatasetSample> pairs;
    double perturb_l2 = 0.0;
    double perturb_h2 = 0.0;
};

// One attempt: perturb (or draw) a start, then take `depth` validated steps.
SeriesResult run_series_scalar(const ScalarProblem& p, const GridFunction* base,
                               const DataRecipe& recipe, int depth, const NewtonConfig& cfg,
                               std::uint64_t seed, std::uint64_t attempt_index) {
    Rng rng = Rng::substream(seed, attempt_index);
    SeriesResult out;

    GridFunction u(p.grid, p.boundary);
    switch (recipe.kind) {
        case RecipeKind::Polynomial: {
            GridFunction v = random_polynomial_field(rng, recipe.poly_degree, recipe.poly_bound, p.grid);
            out.perturb_l2 = norm(v, NormKind::L2);
            out.perturb_h2 = norm(v, NormKind::H2);
            u.values = base->values;
            u.add_scaled(v, 1.0);
            break;
        }
        case RecipeKind::Spectral: {
            GridFunction v = spectral_gaussian_field(rng, p.grid, recipe.delta, recipe.modes,
                                                     recipe.decay_power);
            out.perturb_l2 = norm(v, NormKind::L2);
            out.perturb_h2 = norm(v, NormKind::H2);
            u.values = base->values;
            u.add_scaled(v, 1.0);
            break;
        }
        case RecipeKind::RawSpectral3: {
            GridFunction v = spectral_gaussian_field(rng, p.grid, recipe.delta, recipe.modes, 3.0);
            out.perturb_l2 = norm(v, NormKind::L2);
            out.perturb_h2 = norm(v, NormKind::H2);
            u.values = v.values;
            break;
        }
        case RecipeKind::Uniform01:
            throw std::invalid_argument("uniform01 recipe applies to Gray-Scott datasets");
    }

    for (int step_idx = 0; step_idx < depth; ++step_idx) {
        const GridFunction f = residual(p, u);
        const BandedMatrix jac = assemble_jacobian(p, u);
        std::vector<double> rhs(f.values.size());
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -f.values[i];
        std::vector<double> du;
        try {
            du = banded_lu_solve(jac, rhs);
        } catch (const SingularJacobianError&) {
            return out;  // attempt failed
        }
        if (!step_is_valid(jac, du, f.values)) return out;
        out.pairs.push_back({u.values, du});
        for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] += du[i];
        if (!u.all_finite() || linf(u.values) > cfg.divergence_cap) return out;
    }
    out.ok = true;
    return out;
}

SeriesResult run_series_gs(const GrayScottProblem& p, int depth, const NewtonConfig& cfg,
                           std::uint64_t seed, std::uint64_t attempt_index) {
    Rng rng = Rng::substream(seed, attempt_index);
    SeriesResult out;
    const std::size_t m = p.grid.interior_count();
    GridFunction a = uniform01_field(rng, p.grid);
    GridFunction s = uniform01_field(rng, p.grid);

    for (int step_idx = 0; step_idx < depth; ++step_idx) {
        const auto [fa, fs] = residual_system(p, a, s);
        const BandedMatrix jac = assemble_jacobian(p, a, s);
        std::vector<double> f(2 * m), rhs(2 * m);
        for (std::size_t i = 0; i < m; ++i) {
            f[2 * i] = fa.values[i];
            f[2 * i + 1] = fs.values[i];
            rhs[2 * i] = -fa.values[i];
            rhs[2 * i + 1] = -fs.values[i];
        }
        std::vector<double> delta;
        try {
            delta = banded_lu_solve(jac, rhs);
        } catch (const SingularJacobianError&) {
            return out;
        }
        if (!step_is_valid(jac, delta, f)) return out;

        DatasetSample sample;
        sample.u.resize(2 * m);
        sample.du.resize(2 * m);
        for (std::size_t i = 0; i < m; ++i) {
            sample.u[i] = a.values[i];
            sample.u[m + i] = s.values[i];
            sample.du[i] = delta[2 * i];
            sample.du[m + i] = delta[2 * i + 1];
        }
        out.pairs.push_back(std::move(sample));
        for (std::size_t i = 0; i < m; ++i) {
            a.values[i] += delta[2 * i];
            s.values[i] += delta[2 * i + 1];
        }
        if (!a.all_finite() || !s.all_finite() || std::max(linf(a.values), linf(s.values)) > cfg.divergence_cap) {
            return out;
        }
    }
    out.ok = true;
    return out;
}

// Deterministic wave scheduler: attempt indices are consumed in order; slot k
// keeps the first successful attempt assigned to it.
template <typename RunFn>
OperatorDataset assemble_dataset(std::size_t total_series, int depth, std::uint64_t seed,
                                 int threads, RunFn&& run_attempt) {
    OperatorDataset ds;
    std::vector<SeriesResult> results(total_series);
    std::vector<std::size_t> pending(total_series);
    for (std::size_t i = 0; i < total_series; ++i) pending[i] = i;

    const std::uint64_t budget = 10 * static_cast<std::uint64_t>(total_series);
    std::uint64_t next_attempt = 0;
    std::uint32_t redraws = 0;

    while (!pending.empty()) {
        if (next_attempt >= budget) {
            throw NumericalError("dataset generation exhausted the 10x redraw budget");
        }
        const std::size_t wave = std::min<std::size_t>(pending.size(), budget - next_attempt);
        std::vector<SeriesResult> wave_results(wave);
        const std::uint64_t wave_base = next_attempt;
        parallel_for(wave, threads, [&](std::size_t w) {
            wave_results[w] = run_attempt(pending[w], wave_base + w);
        });
        next_attempt += wave;

        std::vector<std::size_t> still_pending;
        for (std::size_t w = 0; w < wave; ++w) {
            if (wave_results[w].ok) {
                results[pending[w]] = std::move(wave_results[w]);
            } else {
                ++redraws;
                still_pending.push_back(pending[w]);
            }
        }
        // Slots the budget-truncated wave did not reach stay pending.
        still_pending.insert(still_pending.end(), pending.begin() + wave, pending.end());
        pending = std::move(still_pending);
    }

    double l2_sum = 0.0, l2_sq_sum = 0.0, h2_max = 0.0;
    for (auto& r : results) {
        l2_sum += r.perturb_l2;
        l2_sq_sum += r.perturb_l2 * r.perturb_l2;
        h2_max = std::max(h2_max, r.perturb_h2);
        for (auto& pair : r.pairs) ds.samples.push_back(std::move(pair));
    }
    const double mean = l2_sum / static_cast<double>(total_series);
    const double var = std::max(0.0, l2_sq_sum / static_cast<double>(total_series) - mean * mean);
    ds.extra_meta["perturb_l2_mean"] = format_double(mean);
    ds.extra_meta["perturb_l2_std"] = format_double(std::sqrt(var));
    ds.extra_meta["perturb_h2_max"] = format_double(h2_max);

    ds.sample_count = static_cast<std::uint32_t>(ds.samples.size());
    ds.series_count = static_cast<std::uint32_t>(total_series);
    ds.newton_depth = static_cast<std::uint16_t>(depth);
    ds.redraws = redraws;
    ds.seed = seed;
    return ds;
}

} // namespace

OperatorDataset make_dataset(const ScalarProblem& p, const std::vector<GridFunction>& bases,
                             const DataRecipe& recipe, int count, int newton_depth,
                             std::uint64_t seed, const NewtonConfig& cfg,
                             std::uint8_t sensor_stride, int threads) {
    if (count < 1 || newton_depth < 1) throw std::invalid_argument("count and depth must be >= 1");
    const bool needs_base =
        recipe.kind == RecipeKind::Polynomial || recipe.kind == RecipeKind::Spectral;
    if (needs_base && bases.empty()) throw std::invalid_argument("recipe requires base solutions");
    for (const auto& b : bases) {
        if (b.grid != p.grid) throw std::invalid_argument("base grid mismatch");
    }

    const std::size_t n_bases = needs_base ? bases.size() : 1;
    const std::size_t total_series = n_bases * static_cast<std::size_t>(count);

    OperatorDataset ds = assemble_dataset(
        total_series, newton_depth, seed, threads,
        [&](std::size_t slot, std::uint64_t attempt) {
            const GridFunction* base = needs_base ? &bases[slot / static_cast<std::size_t>(count)] : nullptr;
            return run_series_scalar(p, base, recipe, newton_depth, cfg, seed, attempt);
        });
    ds.problem_tag = p.tag;
    ds.problem_params = p.params;
    ds.grid = p.grid;
    ds.sensor_stride = sensor_stride;
    ds.recipe = recipe.kind;
    return ds;
}

OperatorDataset make_dataset_gs(const GrayScottProblem& p, int count, int newton_depth,
                                std::uint64_t seed, const NewtonConfig& cfg,
                                std::uint8_t sensor_stride, int threads) {
    if (count < 1 || newton_depth < 1) throw std::invalid_argument("count and depth must be >= 1");
    OperatorDataset ds = assemble_dataset(
        static_cast<std::size_t>(count), newton_depth, seed, threads,
        [&](std::size_t, std::uint64_t attempt) {
            return run_series_gs(p, newton_depth, cfg, seed, attempt);
        });
    ds.problem_tag = "grayscott";
    ds.problem_params = {p.d_a, p.d_s, p.mu, p.rho};
    ds.grid = p.grid;
    ds.sensor_stride = sensor_stride;
    ds.recipe = RecipeKind::Uniform01;
    return ds;
}

namespace {

std::uint8_t problem_tag_code(const std::string& tag) {
    if (tag == "example1d") return 0;
    if (tag == "convex2d") return 1;
    if (tag == "nonconvex2d") return 2;
    if (tag == "grayscott") return 3;
    throw IoError("unknown problem tag: " + tag);
}

std::string problem_tag_name(std::uint8_t code) {
    switch (code) {
        case 0: return "example1d";
        case 1: return "convex2d";
        case 2: return "nonconvex2d";
        case 3: return "grayscott";
    }
    throw IoError("unknown problem tag code " + std::to_string(code));
}

constexpr std::uint16_t kDatasetVersion = 1;

} // namespace

void save_dataset(const std::string& path, const OperatorDataset& ds) {
    ByteWriter w;
    w.magic("NODS");
    w.u16(kDatasetVersion);
    w.u8(problem_tag_code(ds.problem_tag));
    w.u32(static_cast<std::uint32_t>(ds.problem_params.size()));
    w.f64_array(ds.problem_params);
    w.u8(static_cast<std::uint8_t>(ds.grid.dim));
    w.u32(static_cast<std::uint32_t>(ds.grid.n_interior));
    w.u8(ds.sensor_stride);
    w.u32(static_cast<std::uint32_t>(ds.samples.size()));
    w.u64(ds.seed);
    w.u8(static_cast<std::uint8_t>(ds.recipe));
    for (const auto& s : ds.samples) {
        w.f64_array(s.u);
        w.f64_array(s.du);
    }
    write_file(path, w.bytes());

    std::ostringstream meta;
    meta << "problem=" << ds.problem_tag << "\n";
    meta << "split=" << ds.split << "\n";
    meta << "seed=" << ds.seed << "\n";
    meta << "recipe=" << to_string(ds.recipe) << "\n";
    meta << "samples=" << ds.samples.size() << "\n";
    meta << "series=" << ds.series_count << "\n";
    meta << "newton_depth=" << ds.newton_depth << "\n";
    meta << "redraws=" << ds.redraws << "\n";
    for (const auto& [k, v] : ds.extra_meta) meta << k << "=" << v << "\n";
    write_text_file(path + ".meta", meta.str());
}

OperatorDataset load_dataset(const std::string& path) {
    const std::string data = read_file(path);
    ByteReader r(data);
    r.expect_magic("NODS");
    const std::uint16_t version = r.u16();
    if (version != kDatasetVersion) {
        throw VersionMismatchError("dataset version " + std::to_string(version) +
                                   ", expected " + std::to_string(kDatasetVersion));
    }
    OperatorDataset ds;
    ds.problem_tag = problem_tag_name(r.u8());
    ds.problem_params = r.f64_array(r.u32());
    const int dim = r.u8();
    const int n = static_cast<int>(r.u32());
    ds.grid = (dim == 1) ? Grid::make_1d(n) : Grid::make_2d(n);
    ds.sensor_stride = r.u8();
    ds.sample_count = r.u32();
    ds.seed = r.u64();
    ds.recipe = static_cast<RecipeKind>(r.u8());
    const std::size_t field_len =
        (ds.problem_tag == "grayscott") ? 2 * ds.grid.interior_count() : ds.grid.interior_count();
    ds.samples.resize(ds.sample_count);
    for (auto& s : ds.samples) {
        s.u = r.f64_array(field_len);
        s.du = r.f64_array(field_len);
    }
    if (!r.at_end()) throw IoError("trailing bytes after dataset payload");
    return ds;
}

GridFunction sample_input_field(const OperatorDataset& ds, const BoundarySpec& boundary,
                                std::size_t index) {
    return GridFunction(ds.grid, ds.samples.at(index).u, boundary);
}

GridFunction sample_label_field(const OperatorDataset& ds, std::size_t index) {
    return GridFunction(ds.grid, ds.samples.at(index).du, BoundarySpec::zero());
}

} // namespace nopde
