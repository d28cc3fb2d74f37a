#pragma once

// Command implementations behind the CLI: simulate, denoise, evaluate and the
// full experiment loop. Each command reads and writes files only through the
// paths in its config.

#include <hsdenoise/cube.hpp>
#include <hsdenoise/degrade.hpp>
#include <hsdenoise/error.hpp>
#include <hsdenoise/io.hpp>
#include <hsdenoise/metrics.hpp>
#include <hsdenoise/solver.hpp>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace hsdenoise {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Noise manifest

struct NoiseManifest {
  Dims dims;
  std::optional<int> noise_case;
  NoiseSpec spec;
  Radii radii;
};

inline nlohmann::json to_json(const NoiseManifest &m) {
  nlohmann::json j;
  j["dims"] = {m.dims.n1, m.dims.n2, m.dims.n3};
  j["noise"] = {{"case", m.noise_case ? nlohmann::json(*m.noise_case) : nlohmann::json(nullptr)},
                {"sigma", m.spec.gaussian_sigma},
                {"sparse_rate", m.spec.sparse_rate},
                {"stripe_rate", m.spec.stripe_rate},
                {"stripe_amplitude", m.spec.stripe_amplitude},
                {"rho", m.spec.rho},
                {"seed", m.spec.seed}};
  j["radii"] = {{"alpha", m.radii.alpha}, {"beta", m.radii.beta}, {"epsilon", m.radii.epsilon}};
  return j;
}

inline NoiseManifest manifest_from_json(const nlohmann::json &j) {
  try {
    NoiseManifest m;
    const auto &d = j.at("dims");
    m.dims = {d.at(0).get<std::size_t>(), d.at(1).get<std::size_t>(), d.at(2).get<std::size_t>()};
    const auto &n = j.at("noise");
    if (!n.at("case").is_null()) m.noise_case = n.at("case").get<int>();
    m.spec.gaussian_sigma = n.at("sigma").get<double>();
    m.spec.sparse_rate = n.at("sparse_rate").get<double>();
    m.spec.stripe_rate = n.at("stripe_rate").get<double>();
    m.spec.stripe_amplitude = n.at("stripe_amplitude").get<double>();
    m.spec.rho = n.at("rho").get<double>();
    m.spec.seed = n.at("seed").get<std::uint64_t>();
    const auto &r = j.at("radii");
    m.radii = {r.at("alpha").get<double>(), r.at("beta").get<double>(), r.at("epsilon").get<double>()};
    return m;
  } catch (const nlohmann::json::exception &e) {
    throw InvalidArgument(std::string("malformed noise manifest: ") + e.what());
  }
}

inline nlohmann::json read_json(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoErrorKind::Open, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

inline void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoErrorKind::Write, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError(IoErrorKind::Write, "failed writing " + path.string());
}

inline void write_json(const fs::path &path, const nlohmann::json &j) { write_text(path, j.dump(2) + "\n"); }

inline std::string case_label(std::optional<int> noise_case) {
  return noise_case ? std::to_string(*noise_case) : std::string("custom");
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateConfig {
  fs::path input;
  fs::path out_dir;
  NoiseSpec spec;
  std::optional<int> noise_case;
};

inline void require_normalized(const HSCube &cube, const fs::path &origin) {
  for (double v : cube.values()) {
    if (v < 0.0 || v > 1.0) {
      throw InvalidArgument(origin.string() +
                            " has intensities outside [0, 1]; normalize the clean cube (e.g. divide by its maximum) "
                            "before simulating noise");
    }
  }
}

/// Writes v.hsc, s_true.hsc, t_true.hsc, n_true.hsc and manifest.json.
inline NoiseManifest simulate_to_dir(const HSCube &clean, const SimulateConfig &cfg) {
  cfg.spec.validate();
  fs::create_directories(cfg.out_dir);
  const Degraded deg = degrade(clean, cfg.spec);
  write_cube(deg.observed, cfg.out_dir / "v.hsc");
  write_cube(deg.s_true, cfg.out_dir / "s_true.hsc");
  write_cube(deg.t_true, cfg.out_dir / "t_true.hsc");
  write_cube(deg.n_true, cfg.out_dir / "n_true.hsc");
  const NoiseManifest manifest{clean.dims(), cfg.noise_case, cfg.spec, calibrate_radii(cfg.spec, clean.size())};
  write_json(cfg.out_dir / "manifest.json", to_json(manifest));
  return manifest;
}

inline NoiseManifest simulate_command(const SimulateConfig &cfg) {
  const HSCube clean = read_cube(cfg.input);
  require_normalized(clean, cfg.input);
  return simulate_to_dir(clean, cfg);
}

// ---------------------------------------------------------------------------
// denoise

struct RadiusOverrides {
  std::optional<double> alpha, beta, epsilon;
};

struct DenoiseConfig {
  fs::path input;
  fs::path out_dir;
  std::optional<fs::path> manifest;
  RadiusOverrides radii;
  std::optional<NoiseSpec> calibration; // used when neither flags nor manifest give a radius
  BlockGeometry geometry;
  Regularizer regularizer = Regularizer::S3TTV;
  StoppingRule stop;
  SolverOptions options;
  DynamicRange range;
};

/// Explicit values win over the manifest, which wins over calibrating from
/// the noise spec.
inline Radii resolve_radii(const RadiusOverrides &flags, const std::optional<NoiseManifest> &manifest,
                           const std::optional<NoiseSpec> &calibration, std::size_t n_total) {
  std::optional<Radii> fallback;
  if (manifest) {
    fallback = manifest->radii;
  } else if (calibration) {
    fallback = calibrate_radii(*calibration, n_total);
  }
  auto pick = [&](const std::optional<double> &flag, double Radii::*field, const char *name) {
    if (flag) return *flag;
    if (fallback) return (*fallback).*field;
    throw InvalidArgument(std::string("no value for radius ") + name +
                          ": pass --" + name + ", a noise manifest, or a noise spec to calibrate from");
  };
  return {pick(flags.alpha, &Radii::alpha, "alpha"), pick(flags.beta, &Radii::beta, "beta"),
          pick(flags.epsilon, &Radii::epsilon, "epsilon")};
}

struct DenoiseOutcome {
  Radii radii;
  Solution solution;
};

inline DenoiseOutcome denoise_cube(const HSCube &observed, const Radii &radii, const DenoiseConfig &cfg) {
  DenoiseProblem problem{observed, radii, cfg.range, cfg.geometry, cfg.regularizer};
  return {radii, solve(problem, cfg.stop, cfg.options)};
}

inline void write_solution(const Solution &sol, const fs::path &out_dir) {
  fs::create_directories(out_dir);
  write_cube(sol.u, out_dir / "u_hat.hsc");
  write_cube(sol.s, out_dir / "s_hat.hsc");
  write_cube(sol.t, out_dir / "t_hat.hsc");
  write_json(out_dir / "report.json", to_json(sol.report));
}

/// Writes u_hat.hsc, s_hat.hsc, t_hat.hsc and report.json. When no manifest
/// path is given, manifest.json next to the input is used if present.
inline DenoiseOutcome denoise_command(const DenoiseConfig &cfg) {
  const HSCube observed = read_cube(cfg.input);
  std::optional<NoiseManifest> manifest;
  fs::path manifest_path = cfg.manifest.value_or(cfg.input.parent_path() / "manifest.json");
  if (cfg.manifest || fs::exists(manifest_path)) manifest = manifest_from_json(read_json(manifest_path));
  const Radii radii = resolve_radii(cfg.radii, manifest, cfg.calibration, observed.size());
  DenoiseOutcome outcome = denoise_cube(observed, radii, cfg);
  write_solution(outcome.solution, cfg.out_dir);
  return outcome;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateConfig {
  fs::path estimate;
  fs::path reference;
  fs::path noisy;
  fs::path out_dir;
  std::string dataset = "dataset";
  std::string noise_case = "custom";
  std::string method = "s3ttv";
  std::vector<std::size_t> export_bands;
  std::optional<double> scale;
};

struct EvaluateOutcome {
  MetricReport noisy;
  MetricReport estimate;
};

inline void export_comparison_bands(const HSCube &estimate, const HSCube &reference, const fs::path &out_dir,
                                    const std::vector<std::size_t> &bands, std::optional<double> scale) {
  HSCube diff(reference.dims());
  for (std::size_t n = 0; n < diff.size(); ++n) diff[n] = std::abs(estimate[n] - reference[n]);
  for (std::size_t k : bands) {
    export_band_pgm(estimate, k, out_dir / fmt::format("estimate_band{}.pgm", k), scale);
    export_band_pgm(reference, k, out_dir / fmt::format("reference_band{}.pgm", k), scale);
    export_band_pgm(diff, k, out_dir / fmt::format("absdiff_band{}.pgm", k));
  }
}

/// Writes metrics.json and metrics.csv (header, noisy baseline row, estimate row).
inline EvaluateOutcome evaluate_command(const EvaluateConfig &cfg) {
  const HSCube estimate = read_cube(cfg.estimate);
  const HSCube reference = read_cube(cfg.reference);
  const HSCube noisy = read_cube(cfg.noisy);
  if (estimate.dims() != reference.dims() || noisy.dims() != reference.dims()) {
    throw InvalidArgument("evaluate: estimate, noisy and reference cubes must share dims");
  }
  EvaluateOutcome out{evaluate(noisy, reference), evaluate(estimate, reference)};
  fs::create_directories(cfg.out_dir);
  write_json(cfg.out_dir / "metrics.json", {{"dataset", cfg.dataset},
                                            {"case", cfg.noise_case},
                                            {"noisy", to_json(out.noisy)},
                                            {cfg.method, to_json(out.estimate)}});
  write_text(cfg.out_dir / "metrics.csv",
             std::string(kMetricCsvHeader) + "\n" + metric_csv_row(cfg.dataset, cfg.noise_case, "noisy", out.noisy) +
                 "\n" + metric_csv_row(cfg.dataset, cfg.noise_case, cfg.method, out.estimate) + "\n");
  if (!cfg.export_bands.empty()) export_comparison_bands(estimate, reference, cfg.out_dir, cfg.export_bands, cfg.scale);
  return out;
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentConfig {
  fs::path input;
  fs::path out_dir;
  std::vector<int> cases{1, 2, 3, 4, 5, 6};
  std::vector<Regularizer> regularizers{Regularizer::S3TTV, Regularizer::SSTV};
  double rho = 0.95;
  std::uint64_t seed = 0;
  BlockGeometry geometry;
  StoppingRule stop;
  SolverOptions options;
  std::size_t jobs = 1;
  std::string dataset; // defaults to the input file stem
};

struct ExperimentCell {
  int noise_case = 0;
  Regularizer method = Regularizer::S3TTV;
  bool ok = false;
  bool converged = false;
  std::string error;
  double seconds = 0.0; // wall time of the solve; kept out of the tables
  MetricReport metrics;
  ConvergenceReport report;
};

struct ExperimentResult {
  std::string dataset;
  std::vector<std::pair<int, MetricReport>> noisy; // per case
  std::vector<ExperimentCell> cells;               // case-major, methods in config order
  std::string csv;

  bool all_converged() const {
    return std::all_of(cells.begin(), cells.end(), [](const ExperimentCell &c) { return c.ok && c.converged; });
  }
};

/// Runs every (case, method) cell on `clean`. Output layout:
///   out/case<k>/{v,s_true,t_true,n_true}.hsc, manifest.json
///   out/case<k>/<method>/{u_hat,s_hat,t_hat}.hsc, report.json
///   out/table.csv, out/table.json
inline ExperimentResult run_experiment(const HSCube &clean, const ExperimentConfig &cfg) {
  require_normalized(clean, cfg.input);
  ExperimentResult result;
  result.dataset = cfg.dataset.empty() ? cfg.input.stem().string() : cfg.dataset;
  fs::create_directories(cfg.out_dir);

  struct CaseData {
    int number;
    HSCube observed;
    Radii radii;
  };
  std::vector<CaseData> cases;
  for (int c : cfg.cases) {
    NoiseSpec spec = noise_case(c, cfg.seed);
    spec.rho = cfg.rho;
    const fs::path dir = cfg.out_dir / fmt::format("case{}", c);
    const NoiseManifest manifest = simulate_to_dir(clean, {cfg.input, dir, spec, c});
    HSCube observed = read_cube(dir / "v.hsc");
    result.noisy.emplace_back(c, evaluate(observed, clean));
    cases.push_back({c, std::move(observed), manifest.radii});
  }

  for (const auto &cd : cases) {
    for (Regularizer r : cfg.regularizers) result.cells.push_back({cd.number, r});
  }

  auto run_cell = [&](std::size_t idx) {
    ExperimentCell &cell = result.cells[idx];
    const CaseData &cd = cases[idx / cfg.regularizers.size()];
    const auto start = std::chrono::steady_clock::now();
    try {
      DenoiseConfig dc;
      dc.geometry = cfg.geometry;
      dc.regularizer = cell.method;
      dc.stop = cfg.stop;
      dc.options = cfg.options;
      const DenoiseOutcome out = denoise_cube(cd.observed, cd.radii, dc);
      write_solution(out.solution, cfg.out_dir / fmt::format("case{}", cd.number) / to_string(cell.method));
      cell.metrics = evaluate(out.solution.u, clean);
      cell.report = out.solution.report;
      cell.converged = out.solution.report.converged;
      cell.ok = true;
    } catch (const std::exception &e) {
      cell.error = e.what();
    }
    cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.jobs, result.cells.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < result.cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < result.cells.size(); i = next++) run_cell(i);
      });
    }
  }

  std::string csv = std::string(kMetricCsvHeader) + "\n";
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const std::string label = std::to_string(cases[ci].number);
    csv += metric_csv_row(result.dataset, label, "noisy", result.noisy[ci].second) + "\n";
    table.push_back({{"case", cases[ci].number},
                     {"method", "noisy"},
                     {"mpsnr", result.noisy[ci].second.mpsnr_db},
                     {"mssim", result.noisy[ci].second.mssim}});
    for (std::size_t m = 0; m < cfg.regularizers.size(); ++m) {
      const ExperimentCell &cell = result.cells[ci * cfg.regularizers.size() + m];
      const std::string method = to_string(cell.method);
      if (cell.ok) {
        csv += metric_csv_row(result.dataset, label, method, cell.metrics) + "\n";
        table.push_back({{"case", cell.noise_case},
                         {"method", method},
                         {"mpsnr", cell.metrics.mpsnr_db},
                         {"mssim", cell.metrics.mssim},
                         {"converged", cell.converged},
                         {"iterations", cell.report.iterations}});
      } else {
        csv += fmt::format("{},{},{},nan,nan\n", result.dataset, label, method);
        table.push_back({{"case", cell.noise_case}, {"method", method}, {"error", cell.error}});
      }
    }
  }
  write_text(cfg.out_dir / "table.csv", csv);
  write_json(cfg.out_dir / "table.json", table);
  result.csv = std::move(csv);
  return result;
}

inline ExperimentResult experiment_command(const ExperimentConfig &cfg) {
  return run_experiment(read_cube(cfg.input), cfg);
}

} // namespace hsdenoise
