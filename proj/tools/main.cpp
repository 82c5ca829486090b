// Command-line front end: solve / gen-data / train / eval / iterate / bench.
// Every artifact-producing run writes a manifest (config echo, seeds,
// artifact hashes) next to its outputs. Exit codes: 0 ok, 2 config error,
// 3 io error, 4 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nopde/config.hpp"
#include "nopde/datagen.hpp"
#include "nopde/errors.hpp"
#include "nopde/export.hpp"
#include "nopde/neural.hpp"
#include "nopde/newton.hpp"
#include "nopde/problems.hpp"
#include "nopde/serialize.hpp"
#include "nopde/sha256.hpp"
#include "nopde/surrogate.hpp"
#include "nopde/training.hpp"
#include "nopde/version.hpp"

namespace fs = std::filesystem;
using namespace nopde;

namespace {

struct ProblemHandle {
    std::optional<ScalarProblem> scalar;
    std::optional<GrayScottProblem> gray_scott;

    bool is_scalar() const { return scalar.has_value(); }
    const Grid& grid() const { return is_scalar() ? scalar->grid : gray_scott->grid; }
};

ProblemHandle problem_from_config(const Config& cfg) {
    const std::string name = cfg.require_str("problem");
    const int n = static_cast<int>(cfg.get_int("n", name == "example1d" ? 1023 : 63));
    ProblemHandle h;
    if (name == "example1d") {
        h.scalar = make_example1d(n);
    } else if (name == "convex2d") {
        h.scalar = make_convex2d(n);
    } else if (name == "nonconvex2d") {
        h.scalar = make_nonconvex2d(n, cfg.get_double("s", 1600.0));
    } else if (name == "grayscott") {
        h.gray_scott = make_grayscott(n, cfg.get_double("D_A", 2.5e-4), cfg.get_double("D_S", 5.0e-4),
                                      cfg.get_double("mu", 0.065), cfg.get_double("rho", 0.04));
    } else {
        throw ConfigError("unknown problem: " + name);
    }
    return h;
}

NewtonConfig newton_config_from(const Config& cfg) {
    NewtonConfig nc;
    nc.tol_residual = cfg.get_double("tol", nc.tol_residual);
    nc.max_iter = static_cast<int>(cfg.get_int("max_iter", nc.max_iter));
    nc.divergence_cap = cfg.get_double("divergence_cap", nc.divergence_cap);
    nc.damping = cfg.get_double("damping", nc.damping);
    return nc;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

double parse_num(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad number '" + s + "' in " + what);
    }
}

GridFunction affine_sine_guess(const Grid& grid, const BoundarySpec& boundary, double amplitude) {
    GridFunction u(grid, boundary);
    for (int i = 0; i < grid.n_interior; ++i) {
        const double x = grid.coord(i);
        u.at(i) = x + amplitude * std::sin(std::numbers::pi * x);
    }
    return u;
}

GridFunction sine2d_guess(const Grid& grid, double amplitude) {
    GridFunction u(grid);
    for (int iy = 0; iy < grid.n_interior; ++iy) {
        for (int ix = 0; ix < grid.n_interior; ++ix) {
            u.at(ix, iy) = amplitude * std::sin(std::numbers::pi * grid.coord(ix)) *
                           std::sin(std::numbers::pi * grid.coord(iy));
        }
    }
    return u;
}

/// Guess grammar (comma separated):
///   affine-sine:min:step:max     1D sweep u0 = x + a sin(pi x)
///   sine2d:min:step:max          2D sweep u0 = c sin(pi x) sin(pi y)
///   spectral2d:count:seed:scale  random sine-expansion fields
///   file:PATH                    a saved grid function
std::vector<GridFunction> parse_scalar_guesses(const std::string& spec, const ScalarProblem& p) {
    std::vector<GridFunction> out;
    for (const std::string& item : split(spec, ',')) {
        if (item.empty()) continue;
        const auto parts = split(item, ':');
        const std::string& kind = parts[0];
        if (kind == "affine-sine" || kind == "sine2d") {
            if (parts.size() != 4) throw ConfigError("bad sweep spec: " + item);
            const double lo = parse_num(parts[1], item);
            const double step = parse_num(parts[2], item);
            const double hi = parse_num(parts[3], item);
            if (step <= 0.0) throw ConfigError("sweep step must be positive: " + item);
            for (double a = lo; a <= hi + 1e-12; a += step) {
                out.push_back(kind == "affine-sine" ? affine_sine_guess(p.grid, p.boundary, a)
                                                    : sine2d_guess(p.grid, a));
            }
        } else if (kind == "spectral2d") {
            if (parts.size() < 3 || parts.size() > 4) throw ConfigError("bad spectral spec: " + item);
            const int count = static_cast<int>(parse_num(parts[1], item));
            const std::uint64_t seed = static_cast<std::uint64_t>(parse_num(parts[2], item));
            const double scale = parts.size() == 4 ? parse_num(parts[3], item) : 1.0;
            for (int i = 0; i < count; ++i) {
                Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
                GridFunction v = spectral_gaussian_field(rng, p.grid, 1.0, 16, 2.0);
                v.scale(scale);
                v.boundary = p.boundary;
                out.push_back(std::move(v));
            }
        } else if (kind == "file") {
            if (parts.size() != 2) throw ConfigError("bad file spec: " + item);
            out.push_back(load_grid_function(parts[1]));
        } else {
            throw ConfigError("unknown guess kind: " + kind);
        }
    }
    if (out.empty()) throw ConfigError("guess spec produced no guesses");
    return out;
}

std::vector<std::pair<GridFunction, GridFunction>> parse_gs_guesses(const std::string& spec,
                                                                    const GrayScottProblem& p) {
    std::vector<std::pair<GridFunction, GridFunction>> out;
    for (const std::string& item : split(spec, ',')) {
        if (item.empty()) continue;
        const auto parts = split(item, ':');
        if (parts[0] == "uniform01") {
            if (parts.size() != 3) throw ConfigError("bad uniform01 spec: " + item);
            const int count = static_cast<int>(parse_num(parts[1], item));
            const std::uint64_t seed = static_cast<std::uint64_t>(parse_num(parts[2], item));
            for (int i = 0; i < count; ++i) {
                Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
                GridFunction a = uniform01_field(rng, p.grid);
                GridFunction s = uniform01_field(rng, p.grid);
                out.emplace_back(std::move(a), std::move(s));
            }
        } else {
            throw ConfigError("unknown gray-scott guess kind: " + parts[0]);
        }
    }
    if (out.empty()) throw ConfigError("guess spec produced no guesses");
    return out;
}

class Manifest {
public:
    Manifest(std::string command, const Config& cfg, int threads) {
        body_ << "tool=nopde " << kVersion << "\n";
        body_ << "command=" << std::move(command) << "\n";
        body_ << "threads=" << threads << "\n";
        for (const auto& [k, v] : cfg.entries()) body_ << "config." << k << "=" << v << "\n";
    }

    void note(const std::string& key, const std::string& value) {
        body_ << key << "=" << value << "\n";
    }

    void artifact(const fs::path& path) { artifacts_.push_back(path); }

    void write(const fs::path& path) {
        std::vector<std::string> lines;
        for (const auto& a : artifacts_) {
            lines.push_back("artifact=" + a.filename().string() + " sha256=" + sha256_file_hex(a.string()));
        }
        std::sort(lines.begin(), lines.end());
        std::ostringstream out;
        out << body_.str();
        for (const auto& l : lines) out << l << "\n";
        write_text_file(path.string(), out.str());
    }

private:
    std::ostringstream body_;
    std::vector<fs::path> artifacts_;
};

std::string zero_pad(int value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*d", width, value);
    return buf;
}

// ---------------------------------------------------------------- solve ---

int cmd_solve(const Config& cfg, const std::string& out_dir, int threads) {
    fs::create_directories(out_dir);
    const ProblemHandle prob = problem_from_config(cfg);
    const NewtonConfig nc = newton_config_from(cfg);
    const double dedup = cfg.get_double("dedup_tol", 1e-4);
    const std::string guesses = cfg.require_str("guesses");
    Manifest manifest("solve", cfg, threads);

    std::ostringstream report;
    if (prob.is_scalar()) {
        const ScalarProblem& p = *prob.scalar;
        const auto guess_fields = parse_scalar_guesses(guesses, p);
        const auto solutions = sweep_solutions(p, guess_fields, nc, dedup, threads);
        report << "guesses=" << guess_fields.size() << "\n";
        report << "solutions=" << solutions.size() << "\n";
        // Representative iteration record from the first guess.
        const fs::path traj_path = fs::path(out_dir) / "newton_trajectory.csv";
        write_trajectory_csv(traj_path.string(), newton_solve(p, guess_fields[0], nc));
        manifest.artifact(traj_path);
        for (std::size_t i = 0; i < solutions.size(); ++i) {
            const auto& sol = solutions[i];
            const double res = linf(residual(p, sol).values);
            report << "solution_" << i << " l2=" << format_double(norm(sol, NormKind::L2))
                   << " linf=" << format_double(norm(sol, NormKind::Linf))
                   << " residual_linf=" << format_double(res) << "\n";
            const fs::path bin = fs::path(out_dir) / ("solution_" + zero_pad(static_cast<int>(i), 3) + ".bin");
            save_grid_function(bin.string(), sol);
            manifest.artifact(bin);
            if (p.grid.dim == 2) {
                const fs::path pgm = fs::path(out_dir) / ("solution_" + zero_pad(static_cast<int>(i), 3) + ".pgm");
                write_pgm_with_sidecar(pgm.string(), sol);
                manifest.artifact(pgm);
            }
        }
    } else {
        const GrayScottProblem& p = *prob.gray_scott;
        const auto guess_pairs = parse_gs_guesses(guesses, p);
        const auto solutions = sweep_solutions(p, guess_pairs, nc, dedup, threads);
        report << "guesses=" << guess_pairs.size() << "\n";
        report << "solutions=" << solutions.size() << "\n";
        for (std::size_t i = 0; i < solutions.size(); ++i) {
            const auto& [a, s] = solutions[i];
            const auto [fa, fs_res] = residual_system(p, a, s);
            const double res = std::max(linf(fa.values), linf(fs_res.values));
            report << "solution_" << i << " l2_a=" << format_double(norm(a, NormKind::L2))
                   << " l2_s=" << format_double(norm(s, NormKind::L2))
                   << " residual_linf=" << format_double(res) << "\n";
            const std::string stem = "solution_" + zero_pad(static_cast<int>(i), 3);
            for (const auto& [suffix, field] : {std::pair{"_A", &a}, std::pair{"_S", &s}}) {
                const fs::path bin = fs::path(out_dir) / (stem + suffix + ".bin");
                save_grid_function(bin.string(), *field);
                manifest.artifact(bin);
                const fs::path pgm = fs::path(out_dir) / (stem + suffix + ".pgm");
                write_pgm_with_sidecar(pgm.string(), *field);
                manifest.artifact(pgm);
            }
        }
    }
    const fs::path report_path = fs::path(out_dir) / "sweep_report.txt";
    write_text_file(report_path.string(), report.str());
    manifest.artifact(report_path);
    manifest.write(fs::path(out_dir) / "manifest.txt");
    std::fputs(report.str().c_str(), stdout);
    return 0;
}

// ------------------------------------------------------------- gen-data ---

int cmd_gen_data(const Config& cfg, const std::string& out_file, int threads) {
    if (const fs::path parent = fs::path(out_file).parent_path(); !parent.empty()) {
        fs::create_directories(parent);
    }
    const ProblemHandle prob = problem_from_config(cfg);
    const NewtonConfig nc = newton_config_from(cfg);
    const std::uint64_t seed = cfg.get_u64("seed", 0);
    const int count = static_cast<int>(cfg.get_int("count", 100));
    const int depth = static_cast<int>(cfg.get_int("depth", 3));
    const auto stride = static_cast<std::uint8_t>(cfg.get_int("stride", 1));
    Manifest manifest("gen-data", cfg, threads);

    OperatorDataset ds;
    if (prob.is_scalar()) {
        const ScalarProblem& p = *prob.scalar;
        DataRecipe recipe;
        recipe.kind = recipe_from_string(cfg.get_str("recipe", p.grid.dim == 1 ? "polynomial" : "spectral"));
        recipe.poly_degree = static_cast<int>(cfg.get_int("K", 3));
        recipe.poly_bound = cfg.get_double("L", 1.0);
        recipe.modes = static_cast<int>(cfg.get_int("modes", 16));
        recipe.delta = cfg.get_double("delta", 1.0);
        recipe.decay_power = cfg.get_double("decay", 2.0);

        std::vector<GridFunction> bases;
        if (recipe.kind == RecipeKind::Polynomial || recipe.kind == RecipeKind::Spectral) {
            const auto guess_fields = parse_scalar_guesses(cfg.require_str("guesses"), p);
            const auto solutions =
                sweep_solutions(p, guess_fields, nc, cfg.get_double("dedup_tol", 1e-4), threads);
            if (solutions.empty()) throw NumericalError("base sweep found no solutions");
            const std::string base_sel = cfg.get_str("base_index", "all");
            if (base_sel == "all") {
                bases = solutions;
            } else {
                const auto idx = static_cast<std::size_t>(parse_num(base_sel, "base_index"));
                if (idx >= solutions.size()) {
                    throw ConfigError("base_index " + base_sel + " out of range; sweep found " +
                                      std::to_string(solutions.size()));
                }
                bases.push_back(solutions[idx]);
            }
            manifest.note("base_solutions", std::to_string(bases.size()));
        }
        ds = make_dataset(p, bases, recipe, count, depth, seed, nc, stride, threads);
    } else {
        ds = make_dataset_gs(*prob.gray_scott, count, depth, seed, nc, stride, threads);
    }
    ds.split = cfg.get_str("split", "train");
    save_dataset(out_file, ds);
    manifest.note("samples", std::to_string(ds.samples.size()));
    manifest.note("redraws", std::to_string(ds.redraws));
    manifest.artifact(out_file);
    manifest.artifact(out_file + ".meta");
    manifest.write(out_file + ".manifest");
    std::printf("wrote %s: %u samples (%u series, depth %u, %u redraws)\n", out_file.c_str(),
                ds.sample_count, ds.series_count, ds.newton_depth, ds.redraws);
    return 0;
}

// ---------------------------------------------------------------- train ---

int cmd_train(const Config& cfg, const std::string& data_file, const std::string& data_unsup_file,
              const std::string& data_test_file, const std::string& out_dir, int threads) {
    (void)threads;  // training is sequential; recorded in the manifest anyway
    fs::create_directories(out_dir);

    const OperatorDataset primary = load_dataset(data_file);
    std::optional<OperatorDataset> unsup_ds;
    if (!data_unsup_file.empty()) unsup_ds = load_dataset(data_unsup_file);
    std::optional<OperatorDataset> test_ds;
    if (!data_test_file.empty()) test_ds = load_dataset(data_test_file);

    const ScalarProblem p =
        scalar_problem_from_tag(primary.problem_tag, primary.problem_params, primary.grid.n_interior);

    TrainConfig tc;
    tc.mode = loss_mode_from_string(cfg.get_str("mode", "combined"));
    tc.lambda = cfg.get_double("lambda", 0.01);
    tc.lr = cfg.get_double("lr", 1e-4);
    tc.weight_decay = cfg.get_double("weight_decay", 1e-6);
    tc.batch_size = static_cast<int>(cfg.get_int("batch_size", 50));
    tc.epochs = static_cast<int>(cfg.get_int("epochs", 100));
    tc.seed = cfg.get_u64("seed", 0);
    tc.eval_every = static_cast<int>(cfg.get_int("eval_every", std::max(1, tc.epochs / 20)));
    tc.combined_halve = cfg.get_bool("combined_halve", false);

    const int width = static_cast<int>(cfg.get_int("width", 40));
    const int depth = static_cast<int>(cfg.get_int("net_depth", 2));
    const int trunk_depth = static_cast<int>(cfg.get_int("trunk_depth", depth));
    const int p_rank = static_cast<int>(cfg.get_int("p", 40));
    const bool bias0_trainable = cfg.get_str("bias0", "trainable") != "frozen";

    DeepONet net = init_deeponet(primary.grid, primary.sensor_stride, width, depth, p_rank, tc.seed,
                                 bias0_trainable, trunk_depth);
    if (cfg.get_str("trunk", "mlp") == "pod") {
        const int snapshots =
            std::min<int>(static_cast<int>(cfg.get_int("pod_snapshots", 200)),
                          static_cast<int>(primary.samples.size()));
        std::vector<GridFunction> snaps;
        snaps.reserve(static_cast<std::size_t>(snapshots));
        for (int i = 0; i < snapshots; ++i) snaps.push_back(sample_label_field(primary, i));
        set_pod_trunk(net, compute_pod_basis(snaps, p_rank));
    }

    const OperatorDataset* sup = &primary;
    const OperatorDataset* unsup = unsup_ds ? &*unsup_ds : nullptr;
    if (tc.mode == LossMode::Unsupervised && !unsup) unsup = &primary;
    if (tc.mode == LossMode::Combined && !unsup) {
        throw ConfigError("combined mode needs --data-unsup");
    }
    const OperatorDataset* test = test_ds ? &*test_ds : &primary;

    Manifest manifest("train", cfg, 1);
    const EvalCallback checkpoint_writer = [&](int epoch, const DeepONet& model) {
        const fs::path path = fs::path(out_dir) / ("checkpoint_" + zero_pad(epoch, 6) + ".nonn");
        save_checkpoint(path.string(), model);
    };

    const TrainResult result = train(net, p, sup, unsup, test, tc, checkpoint_writer);

    const fs::path history_path = fs::path(out_dir) / "history.csv";
    write_history_csv(history_path.string(), result.history);
    const fs::path model_path = fs::path(out_dir) / "model.nonn";
    save_checkpoint(model_path.string(), net);
    manifest.artifact(history_path);
    manifest.artifact(model_path);
    if (result.nan_abort) manifest.note("nan_abort", result.message);
    manifest.write(fs::path(out_dir) / "manifest.txt");

    if (result.nan_abort) {
        std::fprintf(stderr, "error: numerical: %s\n", result.message.c_str());
        return 4;
    }
    const auto& last = result.history.back();
    std::printf("trained %d epochs: test l2_rel=%s h1_rel=%s newton=%s\n", tc.epochs,
                format_double(last.test.l2_rel).c_str(), format_double(last.test.h1_rel).c_str(),
                format_double(last.test.newton_loss).c_str());
    return 0;
}

// ----------------------------------------------------------------- eval ---

int cmd_eval(const std::string& model_file, const std::string& data_file,
             const std::string& out_file) {
    const DeepONet net = load_checkpoint(model_file);
    const OperatorDataset ds = load_dataset(data_file);
    const ScalarProblem p =
        scalar_problem_from_tag(ds.problem_tag, ds.problem_params, ds.grid.n_interior);
    const Metrics m = evaluate(net, ds, p);

    std::ostringstream out;
    out << "l2_abs=" << format_double(m.l2_abs) << "\n";
    out << "l2_rel=" << format_double(m.l2_rel) << "\n";
    out << "h1_abs=" << format_double(m.h1_abs) << "\n";
    out << "h1_rel=" << format_double(m.h1_rel) << "\n";
    out << "h2_abs=" << format_double(m.h2_abs) << "\n";
    out << "h2_rel=" << format_double(m.h2_rel) << "\n";
    out << "mse_loss=" << format_double(m.mse_loss) << "\n";
    out << "newton_loss=" << format_double(m.newton_loss) << "\n";
    if (!out_file.empty()) {
        if (const fs::path parent = fs::path(out_file).parent_path(); !parent.empty()) {
            fs::create_directories(parent);
        }
        write_text_file(out_file, out.str());
    }
    std::fputs(out.str().c_str(), stdout);
    return 0;
}

// -------------------------------------------------------------- iterate ---

int cmd_iterate(const Config& cfg, const std::string& model_file, const std::string& data_file,
                int steps, double hybrid_tail, const std::string& out_dir, int threads) {
    fs::create_directories(out_dir);
    const DeepONet net = load_checkpoint(model_file);
    const OperatorDataset ds = load_dataset(data_file);
    const ScalarProblem p =
        scalar_problem_from_tag(ds.problem_tag, ds.problem_params, ds.grid.n_interior);
    const ModelOracle oracle(net, p.grid);

    // Initial states: the first iterate of every series in the dataset.
    std::vector<std::size_t> starts;
    const std::size_t stride = ds.newton_depth > 0 ? ds.newton_depth : 1;
    for (std::size_t i = 0; i < ds.samples.size(); i += stride) starts.push_back(i);
    const auto limit = static_cast<std::size_t>(cfg.get_int("count", 100));
    if (starts.size() > limit) starts.resize(limit);

    std::optional<std::vector<GridFunction>> references;
    if (cfg.has("guesses")) {
        references = sweep_solutions(p, parse_scalar_guesses(cfg.require_str("guesses"), p),
                                     newton_config_from(cfg), cfg.get_double("dedup_tol", 1e-4),
                                     threads);
    }

    Manifest manifest("iterate", cfg, threads);
    std::vector<std::vector<double>> residual_curves(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const GridFunction u0 = sample_input_field(ds, p.boundary, starts[i]);
        const OperatorTrajectory traj = operator_iterate(
            oracle, p, u0, steps, hybrid_tail, references ? &*references : nullptr);
        for (const auto& rec : traj.records) residual_curves[i].push_back(rec.residual_linf);
        if (i < 16) {  // keep the artifact list bounded
            const fs::path path =
                fs::path(out_dir) / ("trajectory_" + zero_pad(static_cast<int>(i), 3) + ".csv");
            write_operator_trajectory_csv(path.string(), traj);
            manifest.artifact(path);
        }
    }

    // Median residual per step across all starts.
    std::ostringstream summary;
    summary << "step,median_residual_linf\n";
    for (int s = 0; s <= steps; ++s) {
        std::vector<double> at_step;
        for (const auto& curve : residual_curves) {
            if (static_cast<std::size_t>(s) < curve.size()) at_step.push_back(curve[static_cast<std::size_t>(s)]);
        }
        if (at_step.empty()) break;
        std::sort(at_step.begin(), at_step.end());
        const double med = at_step.size() % 2 == 1
                               ? at_step[at_step.size() / 2]
                               : 0.5 * (at_step[at_step.size() / 2 - 1] + at_step[at_step.size() / 2]);
        summary << s << ',' << format_double(med) << '\n';
    }
    const fs::path summary_path = fs::path(out_dir) / "iterate_summary.csv";
    write_text_file(summary_path.string(), summary.str());
    manifest.artifact(summary_path);
    manifest.write(fs::path(out_dir) / "manifest.txt");
    std::printf("iterated %zu starts for %d steps\n", starts.size(), steps);
    return 0;
}

// ---------------------------------------------------------------- bench ---

int cmd_bench(const Config& cfg, const std::string& model_file, const std::string& counts_arg,
              int reps, const std::string& out_dir, int threads) {
    fs::create_directories(out_dir);
    const ProblemHandle prob = problem_from_config(cfg);
    if (!prob.is_scalar() || prob.grid().dim != 2) {
        throw ConfigError("bench runs on 2D scalar problems");
    }
    const ScalarProblem& p = *prob.scalar;

    DeepONet net;
    if (!model_file.empty()) {
        net = load_checkpoint(model_file);
    } else {
        net = init_deeponet(p.grid, static_cast<std::uint8_t>(cfg.get_int("stride", 3)),
                            static_cast<int>(cfg.get_int("width", 40)),
                            static_cast<int>(cfg.get_int("net_depth", 2)),
                            static_cast<int>(cfg.get_int("p", 40)), cfg.get_u64("seed", 0));
    }

    std::vector<int> counts;
    for (const auto& c : split(counts_arg.empty() ? cfg.get_str("counts", "500,5000") : counts_arg, ',')) {
        counts.push_back(static_cast<int>(parse_num(c, "counts")));
    }

    const GridFunction base(p.grid, p.boundary);
    const auto rows = bench(p, net, base, counts, reps, cfg.get_u64("seed", 0), threads);

    const fs::path csv_path = fs::path(out_dir) / "bench.csv";
    write_bench_csv(csv_path.string(), rows);

    Manifest manifest("bench", cfg, threads);
    manifest.note("repetitions", std::to_string(reps));
    for (const auto& row : rows) {
        manifest.note("bench." + std::to_string(row.n_systems) + ".solver_seconds",
                      format_double(row.solver_seconds));
        manifest.note("bench." + std::to_string(row.n_systems) + ".solver_seconds_min",
                      format_double(row.solver_seconds_min));
        manifest.note("bench." + std::to_string(row.n_systems) + ".operator_seconds",
                      format_double(row.operator_seconds));
        manifest.note("bench." + std::to_string(row.n_systems) + ".operator_seconds_min",
                      format_double(row.operator_seconds_min));
        manifest.note("bench." + std::to_string(row.n_systems) + ".speedup",
                      format_double(row.speedup));
        std::printf("n=%d solver=%ss operator=%ss speedup=%s\n", row.n_systems,
                    format_double(row.solver_seconds).c_str(),
                    format_double(row.operator_seconds).c_str(), format_double(row.speedup).c_str());
    }
    // Timing values are measurements; the manifest records them but they are
    // not expected to be byte-identical across runs.
    manifest.write(fs::path(out_dir) / "manifest.txt");
    return 0;
}

Config load_and_merge(const std::string& config_path,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
    Config cfg = config_path.empty() ? Config() : Config::from_file(config_path);
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    cfg.reject_unknown_keys(known_config_keys());
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Newton-step operator learning workbench"};
    app.require_subcommand(1);

    std::string config_path, out_path, guesses, model_file, data_file, data_unsup_file,
        data_test_file, mode, counts_arg, split_tag;
    int threads = 1;
    std::int64_t seed = -1, count = -1, epochs = -1, steps = 10, reps = 3;
    double lambda = -1.0, hybrid_tail = 0.0;

    app.add_option("--threads", threads, "worker threads (default 1, reproducible)");

    auto* solve = app.add_subcommand("solve", "multi-start Newton sweep");
    solve->add_option("--config", config_path)->required();
    solve->add_option("--out", out_path)->required();
    solve->add_option("--guesses", guesses, "overrides the config guess spec");

    auto* gen = app.add_subcommand("gen-data", "generate a Newton-step dataset");
    gen->add_option("--config", config_path)->required();
    gen->add_option("--out", out_path)->required();
    gen->add_option("--seed", seed);
    gen->add_option("--count", count);
    gen->add_option("--split", split_tag);

    auto* train_cmd = app.add_subcommand("train", "train the step operator");
    train_cmd->add_option("--config", config_path)->required();
    train_cmd->add_option("--data", data_file)->required();
    train_cmd->add_option("--data-unsup", data_unsup_file);
    train_cmd->add_option("--data-test", data_test_file);
    train_cmd->add_option("--mode", mode);
    train_cmd->add_option("--lambda", lambda);
    train_cmd->add_option("--epochs", epochs);
    train_cmd->add_option("--seed", seed);
    train_cmd->add_option("--out", out_path)->required();

    auto* eval_cmd = app.add_subcommand("eval", "metrics for a checkpoint on a dataset");
    eval_cmd->add_option("--model", model_file)->required();
    eval_cmd->add_option("--data", data_file)->required();
    eval_cmd->add_option("--out", out_path);

    auto* iterate_cmd = app.add_subcommand("iterate", "surrogate Newton iteration");
    iterate_cmd->add_option("--model", model_file)->required();
    iterate_cmd->add_option("--config", config_path)->required();
    iterate_cmd->add_option("--data", data_file)->required();
    iterate_cmd->add_option("--steps", steps);
    iterate_cmd->add_option("--hybrid-tail", hybrid_tail);
    iterate_cmd->add_option("--out", out_path)->required();

    auto* bench_cmd = app.add_subcommand("bench", "solver vs operator timing");
    bench_cmd->add_option("--model", model_file);
    bench_cmd->add_option("--config", config_path)->required();
    bench_cmd->add_option("--counts", counts_arg);
    bench_cmd->add_option("--reps", reps);
    bench_cmd->add_option("--out", out_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        std::vector<std::pair<std::string, std::string>> overrides;
        if (seed >= 0) overrides.emplace_back("seed", std::to_string(seed));
        if (count >= 0) overrides.emplace_back("count", std::to_string(count));
        if (epochs >= 0) overrides.emplace_back("epochs", std::to_string(epochs));
        if (lambda >= 0.0) overrides.emplace_back("lambda", format_double(lambda));
        if (!mode.empty()) overrides.emplace_back("mode", mode);
        if (!guesses.empty()) overrides.emplace_back("guesses", guesses);
        if (!split_tag.empty()) overrides.emplace_back("split", split_tag);
        const Config cfg = load_and_merge(config_path, overrides);

        if (solve->parsed()) return cmd_solve(cfg, out_path, threads);
        if (gen->parsed()) return cmd_gen_data(cfg, out_path, threads);
        if (train_cmd->parsed()) {
            return cmd_train(cfg, data_file, data_unsup_file, data_test_file, out_path, threads);
        }
        if (eval_cmd->parsed()) return cmd_eval(model_file, data_file, out_path);
        if (iterate_cmd->parsed()) {
            return cmd_iterate(cfg, model_file, data_file, steps, hybrid_tail, out_path, threads);
        }
        if (bench_cmd->parsed()) return cmd_bench(cfg, model_file, counts_arg, reps, out_path, threads);
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: io: %s\n", e.what());
        return 3;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: numerical: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: internal: %s\n", e.what());
        return 1;
    }
}
