#ifndef XDFLOW_RUNNER_HPP_
#define XDFLOW_RUNNER_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "xdflow/config.hpp"
#include "xdflow/diagnostics.hpp"
#include "xdflow/mesh.hpp"
#include "xdflow/models.hpp"
#include "xdflow/quadrature.hpp"
#include "xdflow/scheme1d.hpp"
#include "xdflow/scheme2d.hpp"
#include "xdflow/stepping.hpp"

namespace xdflow {

using AnyModel = std::variant<HeatModel, SktModel, TumorModel, SurfactantModel, SeawaterModel,
                              SktManufacturedModel>;

inline AnyModel make_model(const RunConfig& c) {
  if (c.model == "heat") return model_heat();
  if (c.model == "skt") return model_skt();
  if (c.model == "tumor") return model_tumor(c.beta, c.gamma);
  if (c.model == "surfactant") return model_surfactant(c.g);
  if (c.model == "seawater") return model_seawater(c.mu);
  if (c.model == "skt2d_manufactured") return model_skt_2d_manufactured();
  throw std::invalid_argument("unknown model '" + c.model + "'");
}

/// Initial data of the named experiment.
inline InitialData initial_data(const RunConfig& c) {
  using std::numbers::pi;
  const bool two_d = c.dimension == 2;
  if (c.model == "heat") {
    if (two_d)
      return [](std::size_t l, Point p) {
        return l == 0 ? std::sin(pi * p.x) + 2.0 : std::cos(pi * p.y) + 2.0;
      };
    return [](std::size_t l, Point p) {
      return l == 0 ? std::sin(pi * p.x) + 2.0 : std::cos(pi * p.x) + 2.0;
    };
  }
  if (c.model == "skt") {
    if (two_d)
      return [](std::size_t l, Point p) {
        return l == 0 ? std::exp(0.5 * std::sin(p.x)) : std::exp(0.5 * std::cos(2.0 * p.y));
      };
    return [](std::size_t l, Point p) {
      return l == 0 ? std::exp(0.5 * std::sin(p.x)) : std::exp(0.5 * std::cos(2.0 * p.x));
    };
  }
  if (c.model == "tumor")
    return [](std::size_t l, Point p) {
      const double s = std::tanh((0.1 - p.x) / 0.05);
      return l == 0 ? 0.125 * (1.0 + s) : 0.125 * (1.0 - s);
    };
  if (c.model == "surfactant") {
    if (two_d) {
      const double cx = 0.5 * (c.x0 + c.x1);
      const double cy = 0.5 * (c.y0 + c.y1);
      return [cx, cy](std::size_t l, Point p) {
        const double r = std::hypot(p.x - cx, p.y - cy);
        return l == 0 ? 0.5 : 0.5 * (1.0 - std::tanh((r - 0.5) / 0.1));
      };
    }
    return [](std::size_t l, Point p) {
      return l == 0 ? 0.5 : 0.5 * (1.0 - std::tanh((p.x - 0.5) / 0.1));
    };
  }
  if (c.model == "seawater")
    return [](std::size_t l, Point p) {
      if (l == 0) return p.x <= 0.25 ? 0.5 : 0.0;
      if (p.x > 0.5) return 0.0;
      return default_bedrock(0.5, 0.0) - default_bedrock(p.x, p.y) - (p.x - 0.5);
    };
  if (c.model == "skt2d_manufactured")
    return [](std::size_t l, Point p) { return SktManufacturedModel::exact(p, 0.0)[l]; };
  throw std::invalid_argument("no initial data for model '" + c.model + "'");
}

/// Exact solution where one is known (1D heat, 2D heat, manufactured SKT).
inline std::optional<ExactSolution> exact_solution(const RunConfig& c) {
  using std::numbers::pi;
  if (c.model == "heat" && c.dimension == 1 && c.bc == BoundaryCondition::periodic)
    return ExactSolution([](std::size_t l, Point p, double t) {
      const double d = std::exp(-pi * pi * t);
      return l == 0 ? d * std::sin(pi * p.x) + 2.0 : d * std::cos(pi * p.x) + 2.0;
    });
  if (c.model == "heat" && c.dimension == 2 && c.bc == BoundaryCondition::periodic)
    return ExactSolution([](std::size_t l, Point p, double t) {
      const double d = std::exp(-pi * pi * t);
      return l == 0 ? d * std::sin(pi * p.x) + 2.0 : d * std::cos(pi * p.y) + 2.0;
    });
  if (c.model == "skt2d_manufactured")
    return ExactSolution(
        [](std::size_t l, Point p, double t) { return SktManufacturedModel::exact(p, t)[l]; });
  return std::nullopt;
}

inline StepConfig step_config(const RunConfig& c) {
  StepConfig s;
  s.mu_diff = c.mu_diff;
  s.rk_order = c.effective_rk_order();
  s.limiter_on = c.limiter;
  s.theta_safety = c.theta_safety;
  s.epsilon_floor = c.epsilon_floor;
  s.max_halvings = c.max_halvings;
  s.pointwise_min = c.pointwise_min;
  return s;
}

inline Mesh1D mesh_1d(const RunConfig& c, const QuadratureRule& rule, std::size_t n) {
  return build_mesh_1d(c.x0, c.x1, n, rule, c.bc);
}
inline Mesh2D mesh_2d(const RunConfig& c, const QuadratureRule& rule, std::size_t nx,
                      std::size_t ny) {
  return build_mesh_2d(Rect{c.x0, c.x1, c.y0, c.y1}, nx, ny, rule, c.bc);
}

/// Calls fn(op) with an operator of the configured dimension and model.
/// For 1D runs `nx` is the cell count; `ny` is used in 2D only.
template <class Fn>
decltype(auto) with_operator(const RunConfig& c, std::size_t nx, std::size_t ny, Fn&& fn) {
  const auto rule = gauss_lobatto_rule(c.k);
  return std::visit(
      [&](const auto& model) -> decltype(auto) {
        using ModelT = std::decay_t<decltype(model)>;
        if (c.dimension == 1) {
          Operator1D<ModelT> op(mesh_1d(c, rule, nx), rule, model, c.flux_choice());
          return fn(op);
        }
        Operator2D<ModelT> op(mesh_2d(c, rule, nx, ny), rule, model, c.flux_choice());
        return fn(op);
      },
      make_model(c));
}

// CSV output.

inline void write_snapshot_csv(std::ostream& os, const Field& rho, const Mesh1D& mesh) {
  os << "cell,node,x";
  for (std::size_t l = 0; l < rho.components(); ++l) os << ",rho_" << l + 1;
  os << '\n';
  for (std::size_t c = 0; c < rho.cells(); ++c)
    for (std::size_t n = 0; n < rho.nodes_per_cell(); ++n) {
      os << c << ',' << n << ',' << format_double(mesh.position(c, n).x);
      for (std::size_t l = 0; l < rho.components(); ++l) os << ',' << format_double(rho(l, c, n));
      os << '\n';
    }
}

/// 2D snapshot; with a bedrock the extra columns b, b+rho_2 and
/// b+rho_1+rho_2 (bedrock, salt/fresh interface, free surface) are added.
inline void write_snapshot_csv(std::ostream& os, const Field& rho, const Mesh2D& mesh,
                               const std::function<double(double, double)>& bedrock = {}) {
  os << "cell,node,x,y";
  for (std::size_t l = 0; l < rho.components(); ++l) os << ",rho_" << l + 1;
  if (bedrock) os << ",b,b+rho_2,b+rho_1+rho_2";
  os << '\n';
  for (std::size_t c = 0; c < rho.cells(); ++c)
    for (std::size_t n = 0; n < rho.nodes_per_cell(); ++n) {
      const Point p = mesh.position(c, n);
      os << c << ',' << n << ',' << format_double(p.x) << ',' << format_double(p.y);
      for (std::size_t l = 0; l < rho.components(); ++l) os << ',' << format_double(rho(l, c, n));
      if (bedrock) {
        const double b = bedrock(p.x, p.y);
        os << ',' << format_double(b) << ',' << format_double(b + rho(1, c, n)) << ','
           << format_double(b + rho(0, c, n) + rho(1, c, n));
      }
      os << '\n';
    }
}

inline void write_trace_csv(std::ostream& os, const RunReport& r) {
  const std::size_t m = r.mass.empty() ? 0 : r.mass.front().size();
  os << "t,E_h";
  for (std::size_t l = 0; l < m; ++l) os << ",mass_" << l + 1;
  os << ",halvings\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    os << format_double(r.times[i]) << ',' << format_double(r.entropy[i]);
    for (std::size_t l = 0; l < m; ++l) os << ',' << format_double(r.mass[i][l]);
    os << ',' << r.halvings[i] << '\n';
  }
}

struct ErrorRow {
  std::size_t n = 0;
  double h = 0.0;
  ErrorTriple error;
  std::optional<double> order_l1, order_l2, order_linf;
};

inline std::string format_order(const std::optional<double>& o) {
  return o ? format_double(*o) : std::string("-");
}

inline void write_error_csv(std::ostream& os, const std::vector<ErrorRow>& rows) {
  os << "N,L1,order1,L2,order2,Linf,orderinf\n";
  for (const auto& r : rows)
    os << r.n << ',' << format_double(r.error.l1) << ',' << format_order(r.order_l1) << ','
       << format_double(r.error.l2) << ',' << format_order(r.order_l2) << ','
       << format_double(r.error.linf) << ',' << format_order(r.order_linf) << '\n';
}

/// Fills the order columns from the error columns.
inline void fill_orders(std::vector<ErrorRow>& rows) {
  std::vector<double> h, e1, e2, ei;
  for (const auto& r : rows) {
    h.push_back(r.h);
    e1.push_back(r.error.l1);
    e2.push_back(r.error.l2);
    ei.push_back(r.error.linf);
  }
  const auto o1 = observed_order(e1, h);
  const auto o2 = observed_order(e2, h);
  const auto oi = observed_order(ei, h);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].order_l1 = o1[i];
    rows[i].order_l2 = o2[i];
    rows[i].order_linf = oi[i];
  }
}

struct SolveResult {
  Field state;
  RunReport report;
  std::vector<std::filesystem::path> files;
};

namespace detail {

inline std::filesystem::path output_path(const RunConfig& c, const std::string& suffix) {
  return std::filesystem::path(c.output_dir) / (c.prefix + suffix);
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return os;
}

template <class Op>
std::function<double(double, double)> bedrock_of(const Op& op) {
  if constexpr (std::is_same_v<typename Op::model_type, SeawaterModel>)
    return op.model().bedrock;
  else
    return {};
}

template <class Op>
void write_snapshot(const Op& op, const Field& rho, const std::filesystem::path& p) {
  auto os = open_output(p);
  if constexpr (Op::dimension == 1)
    write_snapshot_csv(os, rho, op.mesh());
  else
    write_snapshot_csv(os, rho, op.mesh(), bedrock_of(op));
}

}  // namespace detail

/// Runs one configured experiment to t_end. Writes `<prefix>_t<time>.csv`
/// snapshots (the configured times, else the final state; the initial
/// state only when t_end = 0) and `<prefix>_trace.csv` unless `write` is
/// false. Failures propagate as StepFailure.
inline SolveResult run_solve(const RunConfig& c, bool write = true) {
  validate(c);
  SolveResult result;
  const std::size_t nx = c.dimension == 1 ? c.n : c.cells_x();
  with_operator(c, nx, c.cells_y(), [&](auto& op) {
    Field rho = project_initial(op.mesh(), std::decay_t<decltype(op)>::M, initial_data(c));
    IntegrateOptions opt;
    opt.t_end = c.t_end;
    opt.sample_dt = c.sample_dt;
    std::vector<double> snaps = c.snapshot_times;
    if (snaps.empty()) snaps.push_back(c.t_end);
    opt.snapshot_times = snaps;
    opt.on_snapshot = [&](double t, const Field& f) {
      if (!write) return;
      const auto p = detail::output_path(c, "_t" + format_double(t) + ".csv");
      detail::write_snapshot(op, f, p);
      result.files.push_back(p);
    };
    auto [state, report] = integrate(op, std::move(rho), 0.0, step_config(c), opt);
    result.state = std::move(state);
    result.report = std::move(report);
  });
  if (write) {
    const auto p = detail::output_path(c, "_trace.csv");
    auto os = detail::open_output(p);
    write_trace_csv(os, result.report);
    result.files.push_back(p);
  }
  if (write && c.reference_cells > 0 && c.dimension == 1) {
    // Piecewise-linear reference on a finer mesh, final time only.
    RunConfig ref = c;
    ref.k = 1;
    ref.n = c.reference_cells;
    ref.rk_order = 1;
    ref.reference_cells = 0;
    ref.snapshot_times = {c.t_end};
    ref.prefix = c.prefix + "_reference";
    auto sub = run_solve(ref, true);
    for (auto& f : sub.files) result.files.push_back(std::move(f));
  }
  return result;
}

inline std::size_t worker_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("XDFLOW_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) n = static_cast<std::size_t>(v);
  }
  return n;
}

/// Final state of a run at `cells` (1D) or cells x cells scaled by the
/// domain aspect ratio (2D), without file output.
inline Field solve_level(const RunConfig& c, std::size_t nx, std::size_t ny) {
  return with_operator(c, nx, ny, [&](auto& op) {
    Field rho = project_initial(op.mesh(), std::decay_t<decltype(op)>::M, initial_data(c));
    IntegrateOptions opt;
    opt.t_end = c.t_end;
    opt.track_entropy = false;
    return integrate(op, std::move(rho), 0.0, step_config(c), opt).first;
  });
}

/// Runs `fn(i)` for i in [0, n) on up to worker_count() threads; the first
/// exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min(n, worker_count());
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> tasks;
  for (std::size_t w = 0; w < workers; ++w)
    tasks.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    }));
  for (auto& t : tasks) t.get();
}

/// Error table over the given cell counts. Exact mode compares with the
/// known solution; self mode compares level N with the next level (an
/// extra run at twice the last level supplies the final reference), by
/// evaluating the finer solution at the coarse nodes. Errors are norms of
/// the vector-valued error (see combine_components).
inline std::vector<ErrorRow> run_convergence(const RunConfig& c, std::vector<std::size_t> levels) {
  validate(c);
  if (levels.size() < 2) throw std::invalid_argument("convergence needs at least two levels");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] <= levels[i - 1]) throw std::invalid_argument("levels must be ascending");
  const double lx = c.x1 - c.x0;
  const double aspect = c.dimension == 2 ? (c.y1 - c.y0) / lx : 1.0;
  auto ny_of = [&](std::size_t n) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n * aspect)));
  };
  const auto rule = gauss_lobatto_rule(c.k);
  std::vector<ErrorRow> rows(levels.size());

  if (c.convergence == ConvergenceMode::exact) {
    const auto exact = exact_solution(c);
    if (!exact) throw std::invalid_argument("model '" + c.model + "' has no exact solution here");
    parallel_for(levels.size(), [&](std::size_t i) {
      const std::size_t n = levels[i];
      const Field rho = solve_level(c, n, ny_of(n));
      std::vector<ErrorTriple> errs;
      if (c.dimension == 1)
        errs = error_norms(rho, *exact, c.t_end, mesh_1d(c, rule, n), rule);
      else
        errs = error_norms(rho, *exact, c.t_end, mesh_2d(c, rule, n, ny_of(n)), rule);
      rows[i] = {n, lx / static_cast<double>(n), combine_components(errs), {}, {}, {}};
    });
  } else {
    if (c.dimension != 1) throw std::invalid_argument("self-convergence is one-dimensional only");
    std::vector<std::size_t> all = levels;
    all.push_back(2 * levels.back());
    std::vector<Field> sol(all.size());
    parallel_for(all.size(), [&](std::size_t i) { sol[i] = solve_level(c, all[i], 1); });
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const auto coarse = mesh_1d(c, rule, all[i]);
      const auto fine = mesh_1d(c, rule, all[i + 1]);
      const Field ref = restrict_to_coarse(sol[i + 1], fine, coarse, rule);
      rows[i] = {levels[i], lx / static_cast<double>(levels[i]),
                 combine_components(difference_norms(sol[i], ref, coarse, rule)), {}, {}, {}};
    }
  }
  fill_orders(rows);
  return rows;
}

}  // namespace xdflow

#endif  // XDFLOW_RUNNER_HPP_
