#pragma once

#include <hsdenoise/cube.hpp>
#include <hsdenoise/error.hpp>
#include <hsdenoise/prox.hpp>
#include <hsdenoise/regularizer.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hsdenoise {

enum class Regularizer { S3TTV, SSTV };

inline std::string to_string(Regularizer r) { return r == Regularizer::S3TTV ? "s3ttv" : "sstv"; }

inline Regularizer parse_regularizer(const std::string &name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "s3ttv") return Regularizer::S3TTV;
  if (lower == "sstv") return Regularizer::SSTV;
  throw InvalidArgument("unknown regularizer '" + name + "' (expected s3ttv or sstv)");
}

struct Radii {
  double alpha = 0.0;   // l1 radius of the sparse component
  double beta = 0.0;    // l1 radius of the stripe component
  double epsilon = 0.0; // l2 radius of the data-fidelity ball
};

struct DynamicRange {
  double lower = 0.0;
  double upper = 1.0;
};

/// min R(u) s.t. ||s||_1 <= alpha, ||t||_1 <= beta, Dv t = 0,
///              ||u + s + t - v||_2 <= epsilon, lower <= u <= upper.
struct DenoiseProblem {
  HSCube observed;
  Radii radii;
  DynamicRange range;
  BlockGeometry geometry;
  Regularizer regularizer = Regularizer::S3TTV;

  void validate() const {
    if (observed.empty()) throw InvalidArgument("problem has no observed cube");
    if (!(range.lower < range.upper)) throw InvalidArgument("dynamic range needs lower < upper");
    if (radii.alpha < 0.0 || radii.beta < 0.0 || radii.epsilon < 0.0) {
      throw InvalidArgument("constraint radii must be nonnegative");
    }
    if (regularizer == Regularizer::S3TTV) BlockLayout(geometry, observed.dims());
  }

  /// Number of regularizer blocks; the SSTV term acts as a single block.
  std::size_t block_count() const {
    return regularizer == Regularizer::S3TTV ? BlockLayout(geometry, observed.dims()).count() : 1;
  }
};

struct StepsizeSet {
  double tau_u = 0.0;
  double tau_s = 0.0;
  double tau_t = 0.0;
  double sigma_blocks = 0.0;
  double sigma_stripe = 0.0;
  double sigma_fidelity = 0.0;
};

/// Closed-form stepsizes of the preconditioned iteration for B blocks.
inline StepsizeSet compute_stepsizes(std::size_t block_count) {
  if (block_count == 0) throw InvalidArgument("stepsizes need at least one block");
  const double b = static_cast<double>(block_count);
  return {1.0 / (8.0 * b + 1.0), 1.0, 1.0 / 3.0, 1.0 / 4.0, 1.0 / 2.0, 1.0 / 3.0};
}

inline StepsizeSet compute_stepsizes(const BlockLayout &layout) { return compute_stepsizes(layout.count()); }

/// Reciprocal row/column absolute sums of the assembled operators, evaluated
/// on the actual layout. Column (i, j, k) of Dv Ds has unit entries at pixels
/// (i, j) and (i-1, j) in bands k and k-1, so its weight through the blocks is
/// 2 cov(i, j) + 2 cov(i-1, j); Dh Ds adds 2 cov(i, j) + 2 cov(i, j-1); the
/// identity feeding the fidelity dual adds 1. A single block covering
/// everything (SSTV) gives 1/9.
inline StepsizeSet operator_stepsizes(const DenoiseProblem &problem) {
  const Dims d = problem.observed.dims();
  std::vector<std::size_t> cov(d.band_size(), 1);
  if (problem.regularizer == Regularizer::S3TTV) cov = BlockLayout(problem.geometry, d).coverage();
  double worst = 0.0;
  if (d.n3 > 1) {
    for (std::size_t j = 0; j < d.n2; ++j) {
      for (std::size_t i = 0; i < d.n1; ++i) {
        const double here = static_cast<double>(cov[i + d.n1 * j]);
        double w = 0.0;
        if (d.n1 > 1) w += 2.0 * (here + static_cast<double>(cov[(i + d.n1 - 1) % d.n1 + d.n1 * j]));
        if (d.n2 > 1) w += 2.0 * (here + static_cast<double>(cov[i + d.n1 * ((j + d.n2 - 1) % d.n2)]));
        worst = std::max(worst, w);
      }
    }
  }
  StepsizeSet s = compute_stepsizes(1);
  s.tau_u = 1.0 / (worst + 1.0);
  return s;
}

enum class StepsizePolicy { Verbatim, OperatorSums };

inline StepsizeSet stepsizes_for(const DenoiseProblem &problem, StepsizePolicy policy) {
  return policy == StepsizePolicy::Verbatim ? compute_stepsizes(problem.block_count()) : operator_stepsizes(problem);
}

struct StoppingRule {
  double relative_change_threshold = 1e-5;
  std::size_t max_iterations = 20000;
};

/// Dual of the regularizer term: one matrix per block (S3TTV) or a pair of
/// difference cubes (SSTV).
using RegularizerDual = std::variant<std::vector<StructureTensorBlock>, SpatialPair>;

struct SolverState {
  HSCube u, s, t;
  RegularizerDual y_reg;
  HSCube y_stripe;
  HSCube y_fidelity;
  std::size_t iteration = 0;
  double last_relative_change = std::numeric_limits<double>::infinity();
};

/// u = clamp(v), s = t = 0, all duals zero.
inline SolverState initial_state(const DenoiseProblem &problem) {
  problem.validate();
  const Dims d = problem.observed.dims();
  SolverState st;
  st.u = project_box(problem.observed, problem.range.lower, problem.range.upper);
  st.s = HSCube(d);
  st.t = HSCube(d);
  if (problem.regularizer == Regularizer::S3TTV) {
    const BlockLayout layout(problem.geometry, d);
    std::vector<StructureTensorBlock> blocks(layout.count());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      blocks[b].matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(layout.rows()),
                                               static_cast<Eigen::Index>(layout.cols()));
      blocks[b].index = b;
    }
    st.y_reg = std::move(blocks);
  } else {
    st.y_reg = SpatialPair{HSCube(d), HSCube(d)};
  }
  st.y_stripe = HSCube(d);
  st.y_fidelity = HSCube(d);
  return st;
}

namespace detail {

inline HSCube extrapolate(const HSCube &next, const HSCube &prev) {
  HSCube out(next.dims());
  for (std::size_t n = 0; n < next.size(); ++n) out[n] = 2.0 * next[n] - prev[n];
  return out;
}

// x - step * g, elementwise.
inline HSCube descend(const HSCube &x, double step, const HSCube &g) {
  HSCube out(x.dims());
  for (std::size_t n = 0; n < x.size(); ++n) out[n] = x[n] - step * g[n];
  return out;
}

} // namespace detail

/// One sweep of the preconditioned primal-dual iteration: primal proxes,
/// extrapolation, then conjugate proxes on the duals.
inline SolverState ppds_step(const SolverState &state, const DenoiseProblem &problem, const StepsizeSet &steps) {
  const Dims d = problem.observed.dims();
  if (state.u.dims() != d) throw InvalidArgument("solver state does not match problem dims");
  const bool blockwise = problem.regularizer == Regularizer::S3TTV;
  std::optional<BlockLayout> layout;
  if (blockwise) layout.emplace(problem.geometry, d);

  // Primal updates.
  const SpatialPair reg_back = blockwise
                                   ? scatter_blocks_adjoint(std::get<std::vector<StructureTensorBlock>>(state.y_reg), *layout)
                                   : std::get<SpatialPair>(state.y_reg);
  HSCube grad_u = second_order_diff_adjoint(reg_back);
  grad_u += state.y_fidelity;
  HSCube grad_t = adjoint_diff(state.y_stripe, Axis::Vertical);
  grad_t += state.y_fidelity;

  SolverState next;
  next.u = project_box(detail::descend(state.u, steps.tau_u, grad_u), problem.range.lower, problem.range.upper);
  next.s = project_l1_ball(detail::descend(state.s, steps.tau_s, state.y_fidelity), problem.radii.alpha);
  next.t = project_l1_ball(detail::descend(state.t, steps.tau_t, grad_t), problem.radii.beta);

  const HSCube u_bar = detail::extrapolate(next.u, state.u);
  const HSCube s_bar = detail::extrapolate(next.s, state.s);
  const HSCube t_bar = detail::extrapolate(next.t, state.t);

  // Dual updates.
  const SpatialPair diffs = second_order_diff(u_bar);
  if (blockwise) {
    const auto &prev = std::get<std::vector<StructureTensorBlock>>(state.y_reg);
    auto blocks = extract_blocks(diffs, *layout);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const Eigen::MatrixXd z = prev[b].matrix + steps.sigma_blocks * blocks[b].matrix;
      blocks[b].matrix = prox_conjugate(z, steps.sigma_blocks, [b](const Eigen::MatrixXd &p, double scale) {
        return prox_nuclear(p, scale, b);
      });
    }
    next.y_reg = std::move(blocks);
  } else {
    const auto &prev = std::get<SpatialPair>(state.y_reg);
    auto l1_conj = [&](const HSCube &y, const HSCube &ax) {
      const HSCube z = y + steps.sigma_blocks * ax;
      return prox_conjugate(z, steps.sigma_blocks, [](const HSCube &p, double scale) { return prox_l1(p, scale); });
    };
    next.y_reg = SpatialPair{l1_conj(prev.vertical, diffs.vertical), l1_conj(prev.horizontal, diffs.horizontal)};
  }

  // Conjugate of the {0} indicator is zero, so its prox is the identity.
  next.y_stripe = state.y_stripe + steps.sigma_stripe * forward_diff(t_bar, Axis::Vertical);

  HSCube z3 = u_bar + s_bar;
  z3 += t_bar;
  z3 = state.y_fidelity + steps.sigma_fidelity * z3;
  next.y_fidelity = prox_conjugate(z3, steps.sigma_fidelity, [&](const HSCube &p, double) {
    return project_l2_ball(p, problem.observed, problem.radii.epsilon);
  });

  next.iteration = state.iteration + 1;
  const double base = norm2(state.u);
  const double change = distance2(next.u, state.u);
  next.last_relative_change = base > 0.0 ? change / base : (change > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return next;
}

/// Signed constraint residuals; positive values are violations.
struct ConstraintResiduals {
  double l1_s = 0.0;     // ||s||_1 - alpha
  double l1_t = 0.0;     // ||t||_1 - beta
  double flatness = 0.0; // ||Dv t||_2
  double fidelity = 0.0; // ||u + s + t - v||_2 - epsilon
  double box = 0.0;      // largest distance of a voxel of u outside the range

  /// Largest violation over the five constraints (0 when feasible).
  double max_violation() const {
    return std::max({0.0, l1_s, l1_t, flatness, fidelity, box});
  }
};

inline ConstraintResiduals constraint_residuals(const HSCube &u, const HSCube &s, const HSCube &t,
                                                const DenoiseProblem &problem) {
  ConstraintResiduals r;
  r.l1_s = norm1(s) - problem.radii.alpha;
  r.l1_t = norm1(t) - problem.radii.beta;
  r.flatness = norm2(forward_diff(t, Axis::Vertical));
  HSCube sum_ = u + s;
  sum_ += t;
  r.fidelity = distance2(sum_, problem.observed) - problem.radii.epsilon;
  for (double x : u.values()) {
    r.box = std::max({r.box, problem.range.lower - x, x - problem.range.upper});
  }
  return r;
}

inline double regularizer_value(const HSCube &u, const DenoiseProblem &problem) {
  return problem.regularizer == Regularizer::S3TTV ? s3ttv_value(u, problem.geometry) : sstv_value(u);
}

struct ConvergenceReport {
  std::size_t iterations = 0;
  double relative_change = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;
  ConstraintResiduals residuals;
  StepsizeSet stepsizes;
  StepsizeSet operator_stepsizes;
};

inline nlohmann::json to_json(const StepsizeSet &s) {
  return {{"tau_u", s.tau_u},
          {"tau_s", s.tau_s},
          {"tau_t", s.tau_t},
          {"sigma_blocks", s.sigma_blocks},
          {"sigma_stripe", s.sigma_stripe},
          {"sigma_fidelity", s.sigma_fidelity}};
}

inline nlohmann::json to_json(const ConvergenceReport &r) {
  return {{"iterations", r.iterations},
          {"relative_change", r.relative_change},
          {"converged", r.converged},
          {"objective_trace", r.objective_trace},
          {"residuals",
           {{"l1_s", r.residuals.l1_s},
            {"l1_t", r.residuals.l1_t},
            {"flatness", r.residuals.flatness},
            {"fidelity", r.residuals.fidelity},
            {"box", r.residuals.box}}},
          {"stepsizes", to_json(r.stepsizes)},
          {"operator_stepsizes", to_json(r.operator_stepsizes)}};
}

struct SolverOptions {
  StepsizePolicy stepsizes = StepsizePolicy::Verbatim;
  bool trace_objective = true;
};

struct Solution {
  HSCube u, s, t;
  ConvergenceReport report;
};

/// Runs the iteration from initial_state() until the relative change of u
/// drops below the threshold. Hitting max_iterations is reported through
/// report.converged = false, not thrown.
inline Solution solve(const DenoiseProblem &problem, const StoppingRule &stop = {}, const SolverOptions &opts = {}) {
  if (!(stop.relative_change_threshold > 0.0)) throw InvalidArgument("stopping threshold must be positive");
  if (stop.max_iterations == 0) throw InvalidArgument("max_iterations must be positive");
  const StepsizeSet steps = stepsizes_for(problem, opts.stepsizes);
  SolverState state = initial_state(problem);
  ConvergenceReport report;
  report.stepsizes = steps;
  report.operator_stepsizes = operator_stepsizes(problem);
  while (state.iteration < stop.max_iterations) {
    try {
      state = ppds_step(state, problem, steps);
    } catch (const NumericalFailure &e) {
      throw NumericalFailure(std::string(e.what()) + " at iteration " + std::to_string(state.iteration + 1), e.block(),
                             state.iteration + 1);
    }
    if (opts.trace_objective) report.objective_trace.push_back(regularizer_value(state.u, problem));
    // The first sweep starts from zero duals and cannot move u.
    if (state.iteration > 1 && state.last_relative_change < stop.relative_change_threshold) {
      report.converged = true;
      break;
    }
  }
  report.iterations = state.iteration;
  report.relative_change = state.last_relative_change;
  report.residuals = constraint_residuals(state.u, state.s, state.t, problem);
  return {std::move(state.u), std::move(state.s), std::move(state.t), std::move(report)};
}

} // namespace hsdenoise
