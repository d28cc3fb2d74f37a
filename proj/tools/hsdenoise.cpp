// hsdenoise: simulate mixed noise, denoise, evaluate, or run the whole
// case x regularizer grid.

#include <hsdenoise/pipeline.hpp>
#include <hsdenoise/synthetic.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <optional>
#include <regex>
#include <string>
#include <vector>

namespace {

using namespace hsdenoise;

struct NoiseFlags {
  std::optional<int> noise_case;
  std::optional<double> sigma, sparse_rate, stripe_rate;
  double rho = 0.95;
  std::uint64_t seed = 0;

  void add(CLI::App *cmd) {
    cmd->add_option("--case", noise_case, "noise preset 1..6")->check(CLI::Range(1, 6));
    cmd->add_option("--sigma", sigma, "Gaussian noise standard deviation");
    cmd->add_option("--sparse-rate", sparse_rate, "salt-and-pepper voxel fraction");
    cmd->add_option("--stripe-rate", stripe_rate, "fraction of (column, band) pairs striped");
    cmd->add_option("--rho", rho, "radius shrink factor")->capture_default_str();
    cmd->add_option("--seed", seed, "noise seed")->capture_default_str();
  }

  bool any() const { return noise_case || sigma || sparse_rate || stripe_rate; }

  // Preset first, then individual flags on top of it.
  NoiseSpec spec() const {
    NoiseSpec s = noise_case ? hsdenoise::noise_case(*noise_case, seed) : NoiseSpec{};
    s.seed = seed;
    s.rho = rho;
    if (sigma) s.gaussian_sigma = *sigma;
    if (sparse_rate) s.sparse_rate = *sparse_rate;
    if (stripe_rate) s.stripe_rate = *stripe_rate;
    return s;
  }
};

struct SolverFlags {
  std::string block = "10x10";
  std::string stride;
  std::string regularizer = "s3ttv";
  double tol = 1e-5;
  std::size_t max_iters = 20000;
  std::string stepsizes = "verbatim";

  void add(CLI::App *cmd, bool with_regularizer) {
    cmd->add_option("--block", block, "block size HxW")->capture_default_str();
    cmd->add_option("--stride", stride, "block stride S or HxW (default: block size)");
    if (with_regularizer) {
      cmd->add_option("--regularizer", regularizer, "s3ttv or sstv")->capture_default_str();
    }
    cmd->add_option("--tol", tol, "relative-change stopping threshold")->capture_default_str();
    cmd->add_option("--max-iters", max_iters, "iteration cap")->capture_default_str();
    cmd->add_option("--stepsizes", stepsizes, "verbatim or operator-sums")
        ->check(CLI::IsMember({"verbatim", "operator-sums"}))
        ->capture_default_str();
  }

  static std::pair<std::size_t, std::size_t> parse_pair(const std::string &text, const char *what) {
    static const std::regex pair_re(R"((\d+)(?:[xX](\d+))?)");
    std::smatch m;
    if (!std::regex_match(text, m, pair_re)) throw InvalidArgument(fmt::format("bad {} '{}', expected N or HxW", what, text));
    const std::size_t h = std::stoul(m[1]);
    return {h, m[2].matched ? std::stoul(m[2]) : h};
  }

  BlockGeometry geometry() const {
    auto [bh, bw] = parse_pair(block, "--block");
    auto [sh, sw] = stride.empty() ? std::pair{bh, bw} : parse_pair(stride, "--stride");
    return {bh, bw, sh, sw};
  }

  StoppingRule stop() const { return {tol, max_iters}; }

  SolverOptions options() const {
    SolverOptions o;
    o.stepsizes = stepsizes == "verbatim" ? StepsizePolicy::Verbatim : StepsizePolicy::OperatorSums;
    return o;
  }
};

std::vector<std::size_t> parse_bands(const std::string &text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
      throw InvalidArgument("bad band list '" + text + "'");
    }
    out.push_back(std::stoul(item));
    pos = comma + 1;
  }
  return out;
}

void print_metrics(const char *label, const MetricReport &r) {
  fmt::print("{:<8} MPSNR {:8.4f} dB  MSSIM {:.4f}\n", label, r.mpsnr_db, r.mssim);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Mixed-noise hyperspectral denoising"};
  app.require_subcommand(1);

  // synth
  auto *synth = app.add_subcommand("synth", "write a piecewise-constant synthetic cube");
  std::string synth_out;
  std::size_t n1 = 32, n2 = 32, n3 = 16;
  std::uint64_t synth_seed = 7;
  synth->add_option("--out", synth_out, "output .hsc path")->required();
  synth->add_option("--rows", n1)->capture_default_str();
  synth->add_option("--cols", n2)->capture_default_str();
  synth->add_option("--bands", n3)->capture_default_str();
  synth->add_option("--seed", synth_seed)->capture_default_str();

  // simulate
  auto *simulate = app.add_subcommand("simulate", "add mixed noise to a clean cube");
  std::string sim_in, sim_out;
  NoiseFlags sim_noise;
  simulate->add_option("--input", sim_in, "clean cube (.hsc, values in [0,1])")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_out, "output directory")->required();
  sim_noise.add(simulate);

  // denoise
  auto *denoise = app.add_subcommand("denoise", "recover u, s, t from an observed cube");
  std::string den_in, den_out, den_manifest;
  std::optional<double> alpha, beta, epsilon;
  NoiseFlags den_noise;
  SolverFlags den_solver;
  denoise->add_option("--input", den_in, "observed cube")->required()->check(CLI::ExistingFile);
  denoise->add_option("--out", den_out, "output directory")->required();
  denoise->add_option("--manifest", den_manifest, "noise manifest (default: manifest.json beside the input)")
      ->check(CLI::ExistingFile);
  denoise->add_option("--alpha", alpha, "l1 radius of the sparse component");
  denoise->add_option("--beta", beta, "l1 radius of the stripe component");
  denoise->add_option("--epsilon", epsilon, "l2 radius of the fidelity ball");
  den_noise.add(denoise);
  den_solver.add(denoise, true);

  // evaluate
  auto *evaluate_cmd = app.add_subcommand("evaluate", "MPSNR / MSSIM of an estimate against a reference");
  std::string ev_in, ev_ref, ev_noisy, ev_out, ev_bands, ev_dataset = "dataset", ev_case = "custom", ev_method = "s3ttv";
  std::optional<double> ev_scale;
  evaluate_cmd->add_option("--input", ev_in, "estimate cube")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--reference", ev_ref, "clean cube")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--noisy", ev_noisy, "observed cube for the baseline row")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--out", ev_out, "output directory")->required();
  evaluate_cmd->add_option("--dataset", ev_dataset)->capture_default_str();
  evaluate_cmd->add_option("--case", ev_case)->capture_default_str();
  evaluate_cmd->add_option("--method", ev_method)->capture_default_str();
  evaluate_cmd->add_option("--export-bands", ev_bands, "comma-separated band indices to export as PGM");
  evaluate_cmd->add_option("--scale", ev_scale, "intensity multiplier for exported bands");

  // experiment
  auto *experiment = app.add_subcommand("experiment", "cases x regularizers on one clean cube");
  std::string ex_in, ex_out, ex_cases = "1,2,3,4,5,6", ex_regs = "s3ttv,sstv", ex_dataset;
  double ex_rho = 0.95;
  std::uint64_t ex_seed = 0;
  std::size_t ex_jobs = 1;
  SolverFlags ex_solver;
  experiment->add_option("--input", ex_in, "clean cube")->required()->check(CLI::ExistingFile);
  experiment->add_option("--out", ex_out, "output directory")->required();
  experiment->add_option("--case", ex_cases, "comma-separated case list")->capture_default_str();
  experiment->add_option("--regularizer", ex_regs, "comma-separated regularizers")->capture_default_str();
  experiment->add_option("--rho", ex_rho)->capture_default_str();
  experiment->add_option("--seed", ex_seed)->capture_default_str();
  experiment->add_option("--jobs", ex_jobs, "parallel cells")->capture_default_str()->check(CLI::PositiveNumber);
  experiment->add_option("--dataset", ex_dataset, "dataset label (default: input file stem)");
  ex_solver.add(experiment, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const std::filesystem::path parent = std::filesystem::path(synth_out).parent_path();
      if (!parent.empty()) std::filesystem::create_directories(parent);
      write_cube(make_piecewise_cube({n1, n2, n3}, synth_seed), synth_out);
      return 0;
    }
    if (*simulate) {
      SimulateConfig cfg{sim_in, sim_out, sim_noise.spec(), sim_noise.noise_case};
      const NoiseManifest m = simulate_command(cfg);
      fmt::print("alpha {:.6g}  beta {:.6g}  epsilon {:.6g}\n", m.radii.alpha, m.radii.beta, m.radii.epsilon);
      return 0;
    }
    if (*denoise) {
      DenoiseConfig cfg;
      cfg.input = den_in;
      cfg.out_dir = den_out;
      if (!den_manifest.empty()) cfg.manifest = den_manifest;
      cfg.radii = {alpha, beta, epsilon};
      if (den_noise.any()) cfg.calibration = den_noise.spec();
      cfg.geometry = den_solver.geometry();
      cfg.regularizer = parse_regularizer(den_solver.regularizer);
      cfg.stop = den_solver.stop();
      cfg.options = den_solver.options();
      const DenoiseOutcome out = denoise_command(cfg);
      const ConvergenceReport &r = out.solution.report;
      fmt::print("{} after {} iterations (relative change {:.3g}), max constraint violation {:.3g}\n",
                 r.converged ? "converged" : "NOT converged", r.iterations, r.relative_change,
                 r.residuals.max_violation());
      return r.converged ? 0 : 2;
    }
    if (*evaluate_cmd) {
      EvaluateConfig cfg{ev_in, ev_ref, ev_noisy, ev_out, ev_dataset, ev_case, ev_method, parse_bands(ev_bands), ev_scale};
      const EvaluateOutcome out = evaluate_command(cfg);
      print_metrics("noisy", out.noisy);
      print_metrics(ev_method.c_str(), out.estimate);
      return 0;
    }
    if (*experiment) {
      ExperimentConfig cfg;
      cfg.input = ex_in;
      cfg.out_dir = ex_out;
      cfg.cases.clear();
      for (std::size_t c : parse_bands(ex_cases)) cfg.cases.push_back(static_cast<int>(c));
      cfg.regularizers.clear();
      std::size_t pos = 0;
      while (pos < ex_regs.size()) {
        const std::size_t comma = std::min(ex_regs.find(',', pos), ex_regs.size());
        cfg.regularizers.push_back(parse_regularizer(ex_regs.substr(pos, comma - pos)));
        pos = comma + 1;
      }
      cfg.rho = ex_rho;
      cfg.seed = ex_seed;
      cfg.geometry = ex_solver.geometry();
      cfg.stop = ex_solver.stop();
      cfg.options = ex_solver.options();
      cfg.jobs = ex_jobs;
      cfg.dataset = ex_dataset;
      const ExperimentResult res = experiment_command(cfg);
      std::fputs(res.csv.c_str(), stdout);
      for (const auto &cell : res.cells) {
        if (!cell.ok) fmt::print(stderr, "case {} {}: {}\n", cell.noise_case, to_string(cell.method), cell.error);
      }
      return res.all_converged() ? 0 : 2;
    }
  } catch (const NumericalFailure &e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return 3;
  } catch (const std::exception &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
