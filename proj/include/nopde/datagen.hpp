#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nopde/errors.hpp"
#include "nopde/grid.hpp"
#include "nopde/newton.hpp"
#include "nopde/problems.hpp"
#include "nopde/rng.hpp"

namespace nopde {

/// Random cubic-style polynomial sum a_i x^i with a_i ~ U[-L, L], evaluated
/// at the interior points of a 1D grid (zero boundary spec; the caller folds
/// it into an iterate).
GridFunction random_polynomial_field(Rng& rng, int degree, double bound, const Grid& grid);

/// Truncated sine expansion sum_{i,j<=modes} xi_ij (i^2+j^2)^-decay
/// sin(i pi x) sin(j pi y), xi ~ N(0, delta); i-major draw order. The trace
/// on the boundary is exactly zero.
GridFunction spectral_gaussian_field(Rng& rng, const Grid& grid, double delta, int modes,
                                     double decay_power = 2.0);

/// Per-point uniform [0,1] field (Gray-Scott starts).
GridFunction uniform01_field(Rng& rng, const Grid& grid);

enum class RecipeKind : std::uint8_t {
    Polynomial = 0,    // 1D: base + random polynomial
    Spectral = 1,      // 2D: base + spectral Gaussian, decay 2
    RawSpectral3 = 2,  // 2D: u0 is the spectral field itself, decay 3
    Uniform01 = 3,     // Gray-Scott raw starts
};

const char* to_string(RecipeKind k);
RecipeKind recipe_from_string(const std::string& name);

struct DataRecipe {
    RecipeKind kind = RecipeKind::Polynomial;
    int poly_degree = 3;
    double poly_bound = 1.0;
    int modes = 16;
    double delta = 1.0;
    double decay_power = 2.0;
};

struct DatasetSample {
    std::vector<double> u;
    std::vector<double> du;
};

/// (input field, Newton step) pairs plus the generation recipe. Every label
/// satisfies ||J(u) du + F(u)||_inf <= 1e-8 (1 + ||F(u)||_inf) at generation
/// time.
struct OperatorDataset {
    std::string problem_tag;
    std::vector<double> problem_params;
    Grid grid;
    std::uint8_t sensor_stride = 1;
    std::uint32_t sample_count = 0;
    std::uint64_t seed = 0;
    RecipeKind recipe = RecipeKind::Polynomial;
    std::vector<DatasetSample> samples;

    // Sidecar metadata (not part of the binary layout).
    std::string split = "train";
    std::uint32_t series_count = 0;
    std::uint16_t newton_depth = 0;
    std::uint32_t redraws = 0;
    std::map<std::string, std::string> extra_meta;
};

/// Draws `count` perturbed starts per base, runs `newton_depth` Newton steps
/// each and emits the (u^(i), du^(i)) pairs, i < depth. Failed attempts are
/// dropped and redrawn from fresh substreams (budget 10x); sample order is
/// deterministic for any thread count.
OperatorDataset make_dataset(const ScalarProblem& p, const std::vector<GridFunction>& bases,
                             const DataRecipe& recipe, int count, int newton_depth,
                             std::uint64_t seed, const NewtonConfig& cfg = {},
                             std::uint8_t sensor_stride = 1, int threads = 1);

/// Gray-Scott datasets from uniform01 starts; samples hold stacked [A; S].
OperatorDataset make_dataset_gs(const GrayScottProblem& p, int count, int newton_depth,
                                std::uint64_t seed, const NewtonConfig& cfg = {},
                                std::uint8_t sensor_stride = 1, int threads = 1);

/// "NODS" binary plus a plain-text key=value sidecar at path + ".meta".
void save_dataset(const std::string& path, const OperatorDataset& ds);
OperatorDataset load_dataset(const std::string& path);

/// Rebuilds the per-sample input as a grid function with the problem's
/// boundary data.
GridFunction sample_input_field(const OperatorDataset& ds, const BoundarySpec& boundary,
                                std::size_t index);
GridFunction sample_label_field(const OperatorDataset& ds, std::size_t index);

} // namespace nopde
