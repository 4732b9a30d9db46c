#ifndef XDFLOW_CONFIG_HPP_
#define XDFLOW_CONFIG_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "xdflow/flux.hpp"
#include "xdflow/mesh.hpp"
#include "xdflow/quadrature.hpp"

namespace xdflow {

enum class ConvergenceMode { exact, self };

inline std::string_view to_string(ConvergenceMode m) {
  return m == ConvergenceMode::exact ? "exact" : "self";
}

/// Every setting of one experiment.
struct RunConfig {
  // [model]
  std::string model = "heat";
  double beta = 0.0075;
  double gamma = 10.0;
  double g = 0.02;
  double mu = 0.9;
  // [mesh]
  int dimension = 1;
  int k = 2;
  std::size_t n = 80;
  std::size_t nx = 0;  // 2D; 0 means n
  std::size_t ny = 0;  // 2D; 0 means nx
  double x0 = -1.0;
  double x1 = 1.0;
  double y0 = 0.0;
  double y1 = 1.0;
  BoundaryCondition bc = BoundaryCondition::periodic;
  // [scheme]
  FluxKind flux = FluxKind::lax_friedrichs;
  double lf_multiplier = 1.0;
  bool mirrored = false;
  bool per_edge_alpha = false;
  // [time]
  double mu_diff = 1e-3;
  int rk_order = 0;  // 0 selects by k
  double t_end = 0.0;
  std::vector<double> snapshot_times;
  double sample_dt = 0.0;
  int max_halvings = 40;
  // [limiter]
  bool limiter = true;
  double theta_safety = 1.0;
  bool pointwise_min = false;
  double epsilon_floor = 1e-13;
  // [output]
  std::string output_dir = ".";
  std::string prefix = "run";
  // [run]
  ConvergenceMode convergence = ConvergenceMode::exact;
  std::vector<std::size_t> levels;
  std::vector<int> degrees;
  std::vector<double> lf_multipliers;
  std::uint64_t seed = 1;
  std::size_t reference_cells = 0;

  [[nodiscard]] std::size_t cells_x() const noexcept { return nx ? nx : n; }
  [[nodiscard]] std::size_t cells_y() const noexcept { return ny ? ny : cells_x(); }
  [[nodiscard]] int effective_rk_order() const noexcept {
    if (rk_order != 0) return rk_order;
    return k <= 1 ? 1 : (k <= 3 ? 2 : 3);
  }
  [[nodiscard]] FluxChoice flux_choice() const {
    return FluxChoice{flux, lf_multiplier, mirrored, per_edge_alpha};
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Config error carrying the 1-based line and column of the offending text.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, std::size_t line, std::size_t column)
      : std::runtime_error(line ? "line " + std::to_string(line) + ", column " +
                                      std::to_string(column) + ": " + msg
                                : msg),
        line_(line), column_(column) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

inline const std::vector<std::string>& known_model_names() {
  static const std::vector<std::string> names{"heat",    "skt",      "tumor",
                                               "surfactant", "seawater", "skt2d_manufactured"};
  return names;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view v) {
  double out = 0.0;
  const auto* first = v.data();
  const auto* last = v.data() + v.size();
  if (first != last && *first == '+') ++first;
  auto [p, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || p != last || !std::isfinite(out))
    throw std::invalid_argument("expected a finite number, got '" + std::string(v) + "'");
  return out;
}

template <class Int>
Int parse_int(std::string_view v) {
  Int out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw std::invalid_argument("expected an integer, got '" + std::string(v) + "'");
  return out;
}

inline bool parse_bool(std::string_view v) {
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw std::invalid_argument("expected true/false, got '" + std::string(v) + "'");
}

template <class F>
auto parse_list(std::string_view v, F&& item) {
  std::vector<decltype(item(std::string_view{}))> out;
  if (trim(v).empty()) return out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto next = v.find(',', pos);
    const auto piece = trim(v.substr(pos, next == std::string_view::npos ? v.npos : next - pos));
    if (piece.empty()) throw std::invalid_argument("empty list entry");
    out.push_back(item(piece));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

inline const std::map<std::string, std::string, std::less<>>& key_sections() {
  static const std::map<std::string, std::string, std::less<>> keys{
      {"model", "model"},        {"beta", "model"},          {"gamma", "model"},
      {"g", "model"},            {"mu", "model"},            {"dimension", "mesh"},
      {"k", "mesh"},             {"N", "mesh"},              {"Nx", "mesh"},
      {"Ny", "mesh"},            {"x0", "mesh"},             {"x1", "mesh"},
      {"y0", "mesh"},            {"y1", "mesh"},             {"bc", "mesh"},
      {"flux", "scheme"},        {"lf_multiplier", "scheme"}, {"mirrored", "scheme"},
      {"per_edge_alpha", "scheme"}, {"mu_diff", "time"},     {"rk_order", "time"},
      {"t_end", "time"},         {"snapshot_times", "time"}, {"sample_dt", "time"},
      {"max_halvings", "time"},  {"limiter", "limiter"},     {"theta_safety", "limiter"},
      {"pointwise_min", "limiter"}, {"epsilon_floor", "limiter"}, {"output_dir", "output"},
      {"prefix", "output"},      {"convergence", "run"},     {"levels", "run"},
      {"degrees", "run"},        {"lf_multipliers", "run"},  {"seed", "run"},
      {"reference_cells", "run"}};
  return keys;
}

inline void assign(RunConfig& c, std::string_view key, std::string_view v) {
  if (key == "model") c.model = std::string(v);
  else if (key == "beta") c.beta = parse_double(v);
  else if (key == "gamma") c.gamma = parse_double(v);
  else if (key == "g") c.g = parse_double(v);
  else if (key == "mu") c.mu = parse_double(v);
  else if (key == "dimension") c.dimension = parse_int<int>(v);
  else if (key == "k") c.k = parse_int<int>(v);
  else if (key == "N") c.n = parse_int<std::size_t>(v);
  else if (key == "Nx") c.nx = parse_int<std::size_t>(v);
  else if (key == "Ny") c.ny = parse_int<std::size_t>(v);
  else if (key == "x0") c.x0 = parse_double(v);
  else if (key == "x1") c.x1 = parse_double(v);
  else if (key == "y0") c.y0 = parse_double(v);
  else if (key == "y1") c.y1 = parse_double(v);
  else if (key == "bc") {
    if (v == "periodic") c.bc = BoundaryCondition::periodic;
    else if (v == "zero_flux") c.bc = BoundaryCondition::zero_flux;
    else throw std::invalid_argument("bc must be periodic or zero_flux");
  } else if (key == "flux") {
    if (v == "lax_friedrichs") c.flux = FluxKind::lax_friedrichs;
    else if (v == "alternating") c.flux = FluxKind::alternating;
    else throw std::invalid_argument("flux must be lax_friedrichs or alternating");
  } else if (key == "lf_multiplier") c.lf_multiplier = parse_double(v);
  else if (key == "mirrored") c.mirrored = parse_bool(v);
  else if (key == "per_edge_alpha") c.per_edge_alpha = parse_bool(v);
  else if (key == "mu_diff") c.mu_diff = parse_double(v);
  else if (key == "rk_order") c.rk_order = v == "auto" ? 0 : parse_int<int>(v);
  else if (key == "t_end") c.t_end = parse_double(v);
  else if (key == "snapshot_times") c.snapshot_times = parse_list(v, parse_double);
  else if (key == "sample_dt") c.sample_dt = parse_double(v);
  else if (key == "max_halvings") c.max_halvings = parse_int<int>(v);
  else if (key == "limiter") c.limiter = parse_bool(v);
  else if (key == "theta_safety") c.theta_safety = parse_double(v);
  else if (key == "pointwise_min") c.pointwise_min = parse_bool(v);
  else if (key == "epsilon_floor") c.epsilon_floor = parse_double(v);
  else if (key == "output_dir") c.output_dir = std::string(v);
  else if (key == "prefix") c.prefix = std::string(v);
  else if (key == "convergence") {
    if (v == "exact") c.convergence = ConvergenceMode::exact;
    else if (v == "self") c.convergence = ConvergenceMode::self;
    else throw std::invalid_argument("convergence must be exact or self");
  } else if (key == "levels") c.levels = parse_list(v, parse_int<std::size_t>);
  else if (key == "degrees") c.degrees = parse_list(v, parse_int<int>);
  else if (key == "lf_multipliers") c.lf_multipliers = parse_list(v, parse_double);
  else if (key == "seed") c.seed = parse_int<std::uint64_t>(v);
  else if (key == "reference_cells") c.reference_cells = parse_int<std::size_t>(v);
}

}  // namespace detail

/// Range checks; the message names the offending key.
inline void validate(const RunConfig& c) {
  auto fail = [](const std::string& key, const std::string& what) {
    throw ConfigError(key + ": " + what, 0, 0);
  };
  const auto& names = known_model_names();
  if (std::find(names.begin(), names.end(), c.model) == names.end())
    fail("model", "unknown model '" + c.model + "'");
  if (c.dimension != 1 && c.dimension != 2) fail("dimension", "must be 1 or 2");
  if ((c.model == "seawater" || c.model == "skt2d_manufactured") && c.dimension != 2)
    fail("dimension", "model '" + c.model + "' is two-dimensional");
  if (c.k < kMinDegree || c.k > kMaxDegree)
    fail("k", "supported range is " + std::to_string(kMinDegree) + ".." +
                  std::to_string(kMaxDegree));
  for (int d : c.degrees)
    if (d < kMinDegree || d > kMaxDegree) fail("degrees", "entries must lie in 1..8");
  if (c.dimension == 1 && c.n < 2) fail("N", "must be at least 2");
  if (c.dimension == 2 && (c.cells_x() < 1 || c.cells_y() < 1)) fail("Nx", "must be positive");
  if (!(c.x0 < c.x1)) fail("x1", "must exceed x0");
  if (c.dimension == 2 && !(c.y0 < c.y1)) fail("y1", "must exceed y0");
  if (!(c.lf_multiplier >= 0.0)) fail("lf_multiplier", "must be >= 0");
  for (double m : c.lf_multipliers)
    if (!(m >= 0.0)) fail("lf_multipliers", "entries must be >= 0");
  if (!(c.mu_diff > 0.0)) fail("mu_diff", "must be positive");
  if (c.rk_order < 0 || c.rk_order > 3) fail("rk_order", "must be auto, 1, 2 or 3");
  if (!(c.t_end >= 0.0)) fail("t_end", "must be >= 0");
  for (double t : c.snapshot_times)
    if (!(t >= 0.0) || t > c.t_end) fail("snapshot_times", "entries must lie in [0, t_end]");
  if (!(c.sample_dt >= 0.0)) fail("sample_dt", "must be >= 0");
  if (c.max_halvings < 0) fail("max_halvings", "must be >= 0");
  if (!(c.theta_safety > 0.0 && c.theta_safety <= 1.0)) fail("theta_safety", "must lie in (0, 1]");
  if (!(c.epsilon_floor >= 0.0)) fail("epsilon_floor", "must be >= 0");
  if (c.model == "tumor" && !(c.beta > 0.0)) fail("beta", "must be positive");
  if (c.model == "tumor" && !(c.gamma >= 0.0)) fail("gamma", "must be >= 0");
  if (c.model == "surfactant" && !(c.g >= 0.0)) fail("g", "must be >= 0");
  if (c.model == "seawater" && !(c.mu > 0.0 && c.mu < 1.0)) fail("mu", "must lie in (0, 1)");
  for (std::size_t i = 1; i < c.levels.size(); ++i)
    if (c.levels[i] <= c.levels[i - 1]) fail("levels", "must be strictly ascending");
  if (c.prefix.empty()) fail("prefix", "must not be empty");
}

/// Parses line-oriented `key = value` text with optional `[section]`
/// headers and `#` comments. Keys may appear before any header; under a
/// header they must belong to it. Unknown keys are errors.
inline RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto content = detail::trim(raw);
    if (content.empty()) continue;
    const std::size_t col = static_cast<std::size_t>(content.data() - raw.data()) + 1;
    if (content.front() == '[') {
      if (content.back() != ']') throw ConfigError("unterminated section header", line_no, col);
      section = std::string(detail::trim(content.substr(1, content.size() - 2)));
      static const std::vector<std::string> sections{"model", "mesh",    "scheme", "time",
                                                     "limiter", "output", "run"};
      if (std::find(sections.begin(), sections.end(), section) == sections.end())
        throw ConfigError("unknown section [" + section + "]", line_no, col);
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key = value", line_no, col);
    const auto key = detail::trim(content.substr(0, eq));
    const auto value = detail::trim(content.substr(eq + 1));
    const auto& keys = detail::key_sections();
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError("unknown key '" + std::string(key) + "'", line_no, col);
    if (!section.empty() && it->second != section)
      throw ConfigError("key '" + std::string(key) + "' belongs to [" + it->second + "], not [" +
                            section + "]",
                        line_no, col);
    const std::size_t vcol = static_cast<std::size_t>(value.data() - raw.data()) + 1;
    try {
      detail::assign(cfg, key, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(key) + ": " + e.what(), line_no, vcol);
    }
  }
  validate(cfg);
  return cfg;
}

inline std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  auto list = [](const auto& v, auto fmt) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
  };
  auto num = [](double d) { return format_double(d); };
  auto integer = [](auto i) { return std::to_string(i); };
  auto boolean = [](bool b) { return std::string(b ? "true" : "false"); };
  os << "[model]\nmodel = " << c.model << "\nbeta = " << num(c.beta) << "\ngamma = " << num(c.gamma)
     << "\ng = " << num(c.g) << "\nmu = " << num(c.mu) << "\n\n";
  os << "[mesh]\ndimension = " << c.dimension << "\nk = " << c.k << "\nN = " << c.n
     << "\nNx = " << c.nx << "\nNy = " << c.ny << "\nx0 = " << num(c.x0) << "\nx1 = " << num(c.x1)
     << "\ny0 = " << num(c.y0) << "\ny1 = " << num(c.y1) << "\nbc = " << to_string(c.bc) << "\n\n";
  os << "[scheme]\nflux = " << to_string(c.flux) << "\nlf_multiplier = " << num(c.lf_multiplier)
     << "\nmirrored = " << boolean(c.mirrored) << "\nper_edge_alpha = " << boolean(c.per_edge_alpha)
     << "\n\n";
  os << "[time]\nmu_diff = " << num(c.mu_diff)
     << "\nrk_order = " << (c.rk_order == 0 ? std::string("auto") : std::to_string(c.rk_order))
     << "\nt_end = " << num(c.t_end) << "\nsnapshot_times = " << list(c.snapshot_times, num)
     << "\nsample_dt = " << num(c.sample_dt) << "\nmax_halvings = " << c.max_halvings << "\n\n";
  os << "[limiter]\nlimiter = " << boolean(c.limiter) << "\ntheta_safety = " << num(c.theta_safety)
     << "\npointwise_min = " << boolean(c.pointwise_min)
     << "\nepsilon_floor = " << num(c.epsilon_floor) << "\n\n";
  os << "[output]\noutput_dir = " << c.output_dir << "\nprefix = " << c.prefix << "\n\n";
  os << "[run]\nconvergence = " << to_string(c.convergence) << "\nlevels = " << list(c.levels, integer)
     << "\ndegrees = " << list(c.degrees, integer)
     << "\nlf_multipliers = " << list(c.lf_multipliers, num) << "\nseed = " << c.seed
     << "\nreference_cells = " << c.reference_cells << "\n";
  return os.str();
}

}  // namespace xdflow

#endif  // XDFLOW_CONFIG_HPP_
