#ifndef XDFLOW_STEPPING_HPP_
#define XDFLOW_STEPPING_HPP_

#include <algorithm>
#include <cassert>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "xdflow/diagnostics.hpp"
#include "xdflow/errors.hpp"
#include "xdflow/mesh.hpp"
#include "xdflow/quadrature.hpp"

namespace xdflow {

struct StepConfig {
  double mu_diff = 1e-3;
  int rk_order = 2;
  bool limiter_on = true;
  double theta_safety = 1.0;
  double epsilon_floor = 1e-13;
  int max_halvings = 40;
  /// Limiter minima from 4(k+1) equispaced samples per direction in
  /// addition to the nodes.
  bool pointwise_min = false;

  void validate() const {
    if (!(mu_diff > 0.0) || !std::isfinite(mu_diff))
      throw std::invalid_argument("mu_diff must be positive");
    if (rk_order < 1 || rk_order > 3) throw std::invalid_argument("rk_order must be 1, 2 or 3");
    if (!(theta_safety > 0.0 && theta_safety <= 1.0))
      throw std::invalid_argument("theta_safety must lie in (0, 1]");
    if (!(epsilon_floor >= 0.0)) throw std::invalid_argument("epsilon_floor must be >= 0");
    if (max_halvings < 0) throw std::invalid_argument("max_halvings must be >= 0");
  }
};

/// Euler for k = 1, SSP-RK2 for k = 2, 3 and SSP-RK3 from k = 4 on.
inline int auto_rk_order(int k) noexcept { return k <= 1 ? 1 : (k <= 3 ? 2 : 3); }

/// Location of a negative cell average.
struct NegativeAverage {
  std::size_t cell = 0;
  std::size_t component = 0;
  double average = 0.0;
};

struct StepOutcome {
  bool accepted = false;
  int halvings = 0;
  double tau = 0.0;
  Field state;
  std::vector<double> min_nodal;
  std::size_t limiter_activations = 0;
};

template <class Op>
concept SemiDiscreteOperator = requires(Op& op, const Op& cop, const Field& f, Field& out) {
  op.rhs(f, 0.0, out);
  { cop.make_field() } -> std::same_as<Field>;
  { cop.cells() } -> std::convertible_to<std::size_t>;
  { cop.nodes_per_cell() } -> std::convertible_to<std::size_t>;
  { cop.reference_weights() } -> std::convertible_to<const std::vector<double>&>;
  { cop.min_cell_size() } -> std::convertible_to<double>;
  { cop.cell_measure(std::size_t{}) } -> std::convertible_to<double>;
  { cop.rule() } -> std::convertible_to<const QuadratureRule&>;
  { Op::dimension } -> std::convertible_to<int>;
};

/// Cellwise scaling limiter about the quadrature average.
class ScalingLimiter {
 public:
  /// `dimension` selects the tensor sampling grid when pointwise minima are on.
  ScalingLimiter(const QuadratureRule& rule, int dimension, std::vector<double> weights,
                 const StepConfig& config)
      : weights_(std::move(weights)), safety_(config.theta_safety),
        eps_floor_(config.epsilon_floor), dimension_(dimension) {
    if (config.pointwise_min) {
      const std::size_t ns = 4 * rule.size();
      const std::size_t np = rule.size();
      sample_1d_.resize(ns * np);
      for (std::size_t a = 0; a < ns; ++a) {
        const double x = -1.0 + 2.0 * static_cast<double>(a) / static_cast<double>(ns - 1);
        const auto b = lagrange_basis(rule, x);
        std::copy(b.begin(), b.end(), sample_1d_.begin() + static_cast<std::ptrdiff_t>(a * np));
      }
      samples_ = ns;
      np_ = np;
    }
  }

  enum class BlockResult { unchanged, limited, negative };

  /// Limits one (cell, component) block in place.
  BlockResult limit_block(std::span<double> v) const {
    const double avg = cell_average(v, weights_);
    if (avg < 0.0) return BlockResult::negative;
    double mn = *std::min_element(v.begin(), v.end());
    if (samples_ > 0) mn = std::min(mn, sampled_min(v));
    const double eps = std::min(eps_floor_, avg);
    if (!(avg > mn) || mn >= eps) return BlockResult::unchanged;
    const double theta = std::min((avg - eps) / (avg - mn), 1.0) * safety_;
    for (double& x : v) x = avg + theta * (x - avg);
    return BlockResult::limited;
  }

  struct Result {
    std::size_t activations = 0;
    std::vector<NegativeAverage> negative;
  };

  /// Limits `rho` in place; cells with a negative average are left alone
  /// and reported.
  Result apply(Field& rho) const {
    Result res;
    for (std::size_t c = 0; c < rho.cells(); ++c)
      for (std::size_t l = 0; l < rho.components(); ++l) {
        const auto r = limit_block(rho.block(l, c));
        if (r == BlockResult::negative)
          res.negative.push_back({c, l, cell_average(rho.block(l, c), weights_)});
        else if (r == BlockResult::limited)
          ++res.activations;
      }
    return res;
  }

 private:
  double sampled_min(std::span<const double> v) const {
    double mn = std::numeric_limits<double>::infinity();
    if (dimension_ == 1) {
      for (std::size_t a = 0; a < samples_; ++a) {
        double s = 0.0;
        for (std::size_t r = 0; r < np_; ++r) s += sample_1d_[a * np_ + r] * v[r];
        mn = std::min(mn, s);
      }
      return mn;
    }
    // Tensor grid: first contract in x for every node row, then in y.
    std::vector<double> rows(samples_ * np_);
    for (std::size_t s = 0; s < np_; ++s)
      for (std::size_t a = 0; a < samples_; ++a) {
        double acc = 0.0;
        for (std::size_t r = 0; r < np_; ++r) acc += sample_1d_[a * np_ + r] * v[r + s * np_];
        rows[a + s * samples_] = acc;
      }
    for (std::size_t b = 0; b < samples_; ++b)
      for (std::size_t a = 0; a < samples_; ++a) {
        double acc = 0.0;
        for (std::size_t s = 0; s < np_; ++s) acc += sample_1d_[b * np_ + s] * rows[a + s * samples_];
        mn = std::min(mn, acc);
      }
    return mn;
  }

  std::vector<double> weights_;
  double safety_ = 1.0;
  double eps_floor_ = 1e-13;
  int dimension_ = 1;
  std::vector<double> sample_1d_;
  std::size_t samples_ = 0;
  std::size_t np_ = 0;
};

template <class Mesh>
Field scaling_limiter(const Field& rho, const Mesh& mesh, const QuadratureRule& rule,
                      const StepConfig& config) {
  constexpr int dim = std::is_same_v<Mesh, Mesh2D> ? 2 : 1;
  ScalingLimiter lim(rule, dim, average_weights(mesh, rule), config);
  Field out = rho;
  lim.apply(out);
  return out;
}

template <SemiDiscreteOperator Op>
double cfl_bound(Op& op, const Field& rho, double t = 0.0) {
  return op.cfl_bound(rho, t);
}

inline std::vector<double> min_nodal_values(const Field& rho) {
  std::vector<double> mn(rho.components(), std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < rho.cells(); ++c)
    for (std::size_t l = 0; l < rho.components(); ++l)
      for (double v : rho.block(l, c)) mn[l] = std::min(mn[l], v);
  return mn;
}

namespace detail {
inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}
}  // namespace detail

/// Explicit stepper for one operator: Euler / SSP-RK stages with the
/// positivity limiter and halve-and-redo on negative stage averages.
///
/// Stages are carried as increments over the step's initial state, so the
/// step returns the increment separately from the new state; `integrate`
/// adds it with compensated summation. The stage values themselves are
/// the Shu-Osher ones.
template <SemiDiscreteOperator Op>
class Stepper {
 public:
  Stepper(Op& op, StepConfig config)
      : op_(op), config_(config),
        limiter_(op.rule(), Op::dimension, op.reference_weights(), config) {
    config_.validate();
    k_ = op_.make_field();
    x_ = op_.make_field();
    d_ = op_.make_field();
    e_ = op_.make_field();
  }

  [[nodiscard]] const StepConfig& config() const noexcept { return config_; }
  [[nodiscard]] Op& op() noexcept { return op_; }

  /// One full step of the configured order from (rho, t) with trial size tau.
  StepOutcome step(const Field& rho, double t, double tau) {
    return step(rho, t, tau, config_.rk_order);
  }

  StepOutcome step(const Field& rho, double t, double tau, int order) {
    Field increment;
    return step(rho, t, tau, order, increment);
  }

  /// As above; `increment` receives new state - rho before rounding of the sum.
  StepOutcome step(const Field& rho, double t, double tau, int order, Field& increment) {
    StepOutcome out;
    double trial = tau;
    for (int h = 0;; ++h) {
      Counters cnt;
      increment = op_.make_field();
      attempt(rho, t, trial, order, increment, cnt);
      if (!cnt.bad) {
        out.accepted = true;
        out.halvings = h;
        out.tau = trial;
        out.limiter_activations = cnt.activations;
        out.state = rho;
        auto& sv = out.state.values();
        const auto& iv = increment.values();
        for (std::size_t i = 0; i < sv.size(); ++i) sv[i] += iv[i];
        out.min_nodal = min_nodal_values(out.state);
        return out;
      }
      if (h >= config_.max_halvings)
        throw StepFailure("negative cell average persists after " +
                              std::to_string(config_.max_halvings) + " halvings (average " +
                              detail::sci(cnt.bad->average) + ")",
                          t, cnt.bad->cell, cnt.bad->component);
      trial *= 0.5;
    }
  }

 private:
  struct Counters {
    std::optional<NegativeAverage> bad;
    std::size_t activations = 0;
  };

  /// Euler stage on the state rho + d_in: e_out = d_in + tau L(rho + d_in, t),
  /// followed by the average check and the limiter on rho + e_out.
  void euler_stage(const Field& rho, const Field* d_in, double t, double tau, Field& e_out,
                   Counters& cnt) {
    const auto& r = rho.values();
    const Field* input = &rho;
    if (d_in) {
      auto& x = x_.values();
      const auto& d = d_in->values();
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = r[i] + d[i];
      input = &x_;
    }
#ifndef NDEBUG
    if (config_.limiter_on)
      for (double v : input->values()) assert(v >= -1e-15 && "stage input must be nodal non-negative");
#endif
    op_.rhs(*input, t, k_);
    auto& e = e_out.values();
    const auto& k = k_.values();
    if (d_in) {
      const auto& d = d_in->values();
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = d[i] + tau * k[i];
    } else {
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = tau * k[i];
    }
    const std::size_t npc = rho.nodes_per_cell();
    std::vector<double> u(npc);
    for (std::size_t c = 0; c < rho.cells(); ++c)
      for (std::size_t l = 0; l < rho.components(); ++l) {
        const auto base = rho.block(l, c);
        auto inc = e_out.block(l, c);
        for (std::size_t n = 0; n < npc; ++n) {
          u[n] = base[n] + inc[n];
          if (!std::isfinite(u[n])) throw NonFiniteError("Euler stage", c, l);
        }
        if (!config_.limiter_on) {
          // Averages within the limiter floor of zero are round-off.
          const double avg = cell_average(u, op_.reference_weights());
          if (avg < -config_.epsilon_floor)
            throw StepFailure("negative cell average " + detail::sci(avg) +
                                  " with the limiter disabled",
                              t, c, l);
          continue;
        }
        if (cnt.bad) continue;
        const auto res = limiter_.limit_block(u);
        if (res == ScalingLimiter::BlockResult::negative) {
          cnt.bad = NegativeAverage{c, l, cell_average(u, op_.reference_weights())};
        } else if (res == ScalingLimiter::BlockResult::limited) {
          ++cnt.activations;
          for (std::size_t n = 0; n < npc; ++n) inc[n] = u[n] - base[n];
        }
      }
  }

  void attempt(const Field& rho, double t, double tau, int order, Field& delta, Counters& cnt) {
    switch (order) {
      case 1:
        euler_stage(rho, nullptr, t, tau, delta, cnt);
        break;
      case 2:
        // u1 = E(u); u+ = u/2 + E(u1)/2.
        euler_stage(rho, nullptr, t, tau, d_, cnt);
        if (cnt.bad) break;
        euler_stage(rho, &d_, t + tau, tau, e_, cnt);
        if (cnt.bad) break;
        scale(delta, 0.5, e_);
        break;
      case 3:
        // u1 = E(u); u2 = 3u/4 + E(u1)/4; u+ = u/3 + 2E(u2)/3.
        euler_stage(rho, nullptr, t, tau, d_, cnt);
        if (cnt.bad) break;
        euler_stage(rho, &d_, t + tau, tau, e_, cnt);
        if (cnt.bad) break;
        scale(d_, 0.25, e_);
        euler_stage(rho, &d_, t + 0.5 * tau, tau, e_, cnt);
        if (cnt.bad) break;
        scale(delta, 2.0 / 3.0, e_);
        break;
      default:
        throw std::invalid_argument("unsupported Runge-Kutta order " + std::to_string(order));
    }
  }

  static void scale(Field& out, double a, const Field& x) {
    auto& o = out.values();
    const auto& xv = x.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = a * xv[i];
  }

  Op& op_;
  StepConfig config_;
  ScalingLimiter limiter_;
  Field k_, x_, d_, e_;
};

template <SemiDiscreteOperator Op>
StepOutcome euler_step(Op& op, const Field& rho, double t, double tau, const StepConfig& config) {
  Stepper<Op> s(op, config);
  return s.step(rho, t, tau, 1);
}

template <SemiDiscreteOperator Op>
StepOutcome ssp_rk_step(Op& op, const Field& rho, double t, double tau, int order,
                        const StepConfig& config) {
  if (order != 2 && order != 3) throw std::invalid_argument("ssp_rk_step: order must be 2 or 3");
  Stepper<Op> s(op, config);
  return s.step(rho, t, tau, order);
}

struct IntegrateOptions {
  double t_end = 0.0;
  /// Time-based sampling stride of the entropy/mass trace; 0 samples every step.
  double sample_dt = 0.0;
  /// Times the stepper lands on exactly; `on_snapshot` is called there.
  std::vector<double> snapshot_times;
  std::function<void(double, const Field&)> on_snapshot;
  /// Called after every accepted step with (t, state, outcome).
  std::function<void(double, const Field&, const StepOutcome&)> on_step;
  /// Track E_h every step (needed for the monotonicity monitor).
  bool track_entropy = true;
};

/// Advances rho0 from t0 to options.t_end with tau = mu_diff * h_min^2
/// (shortened to land on snapshot times and t_end).
template <SemiDiscreteOperator Op>
std::pair<Field, RunReport> integrate(Op& op, Field rho0, double t0, const StepConfig& config,
                                      const IntegrateOptions& options) {
  if (!(options.t_end >= t0)) throw std::invalid_argument("integrate: t_end must be >= start");
  Stepper<Op> stepper(op, config);
  const auto& mesh = op.mesh();
  const auto& rule = op.rule();
  const auto& model = op.model();
  const double h = op.min_cell_size();
  const double tau0 = config.mu_diff * h * h;

  RunReport report;
  double t = t0;
  Field rho = std::move(rho0);
  auto entropy = [&](const Field& f, double time) {
    return discrete_entropy(f, time, mesh, rule, model);
  };
  auto mass = [&](const Field& f) { return component_mass(f, mesh, rule); };

  double e_prev = options.track_entropy ? entropy(rho, t) : 0.0;
  std::vector<double> m_prev = mass(rho);
  report.min_nodal = min_nodal_values(rho);
  int halvings_since_sample = 0;
  auto sample = [&](double time, double e, const std::vector<double>& m) {
    report.times.push_back(time);
    report.entropy.push_back(e);
    report.mass.push_back(m);
    report.halvings.push_back(halvings_since_sample);
    halvings_since_sample = 0;
  };
  sample(t, options.track_entropy ? e_prev : entropy(rho, t), m_prev);
  double next_sample = t + options.sample_dt;

  std::vector<double> stops = options.snapshot_times;
  std::sort(stops.begin(), stops.end());
  std::size_t next_stop = 0;
  while (next_stop < stops.size() && stops[next_stop] < t) ++next_stop;
  while (next_stop < stops.size() && stops[next_stop] == t) {
    if (options.on_snapshot) options.on_snapshot(t, rho);
    ++next_stop;
  }

  Field increment = op.make_field();
  Field carry = op.make_field();
  const double time_tol = 1e-12 * std::max(1.0, std::abs(options.t_end));
  while (t < options.t_end - time_tol) {
    double target = options.t_end;
    if (next_stop < stops.size()) target = std::min(target, stops[next_stop]);
    double tau = tau0;
    bool lands = false;
    if (t + tau >= target - time_tol) {
      tau = target - t;
      lands = true;
    }
    StepOutcome out;
    try {
      out = stepper.step(rho, t, tau, config.rk_order, increment);
    } catch (const NonFiniteError& e) {
      throw StepFailure(std::string("non-finite state (last good time ") + std::to_string(t) +
                            "): " + e.what(),
                        t, e.cell(), e.component());
    }
    if (out.halvings > 0) {
      report.halving_log.push_back({t, report.steps, out.halvings, out.tau});
      halvings_since_sample += out.halvings;
      lands = false;
    }
    t = lands ? target : t + out.tau;
    // Compensated (Kahan) accumulation of the state.
    {
      auto& r = rho.values();
      auto& cv = carry.values();
      const auto& iv = increment.values();
      const auto& plain = out.state.values();
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double y = iv[i] - cv[i];
        const double s = r[i] + y;
        cv[i] = (s - r[i]) - y;
        r[i] = s;
        if (config.limiter_on && r[i] < 0.0 && plain[i] >= 0.0) {
          r[i] = plain[i];
          cv[i] = 0.0;
        }
      }
    }
    ++report.steps;
    report.limiter_activations += out.limiter_activations;
    const auto mn = min_nodal_values(rho);
    for (std::size_t l = 0; l < report.min_nodal.size(); ++l)
      report.min_nodal[l] = std::min(report.min_nodal[l], mn[l]);

    const auto m = mass(rho);
    for (std::size_t l = 0; l < m.size(); ++l) {
      const double rel = std::abs(m[l] - m_prev[l]) / std::max(std::abs(m_prev[l]), 1e-300);
      report.max_relative_mass_change = std::max(report.max_relative_mass_change, rel);
    }
    m_prev = m;
    double e = 0.0;
    if (options.track_entropy) {
      e = entropy(rho, t);
      report.max_entropy_increase = std::max(report.max_entropy_increase, e - e_prev);
      e_prev = e;
    }
    if (options.on_step) options.on_step(t, rho, out);

    const bool at_end = t >= options.t_end - time_tol;
    if (options.sample_dt <= 0.0 || t >= next_sample - time_tol || at_end) {
      sample(t, options.track_entropy ? e : entropy(rho, t), m);
      if (options.sample_dt > 0.0)
        while (next_sample <= t + time_tol) next_sample += options.sample_dt;
    }
    while (next_stop < stops.size() && stops[next_stop] <= t + time_tol) {
      if (options.on_snapshot) options.on_snapshot(t, rho);
      ++next_stop;
    }
  }
  report.final_time = t;
  return {std::move(rho), std::move(report)};
}

}  // namespace xdflow

#endif  // XDFLOW_STEPPING_HPP_
