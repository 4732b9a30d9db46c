// Command-line driver: single runs, convergence studies and property checks.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "xdflow/xdflow.hpp"

namespace {

// Overrides are appended under their own section header so they win over
// the file's values.
xdflow::RunConfig load_config(const std::string& path, const std::vector<std::string>& sets) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf() << "\n";
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got " + kv);
    const auto key = std::string(xdflow::detail::trim(std::string_view(kv).substr(0, eq)));
    const auto& keys = xdflow::detail::key_sections();
    const auto it = keys.find(key);
    if (it == keys.end()) throw std::runtime_error("--set: unknown key '" + key + "'");
    ss << "[" << it->second << "]\n" << kv << "\n";
  }
  return xdflow::parse_config(ss.str());
}

std::string number(double v) { return xdflow::format_double(v); }

int cmd_solve(const std::string& path, const std::vector<std::string>& sets,
              const std::string& out_dir) {
  auto cfg = load_config(path, sets);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const auto res = xdflow::run_solve(cfg);
  const auto& r = res.report;
  std::cout << "model " << cfg.model << ", " << cfg.dimension << "D, k=" << cfg.k
            << ", reached t=" << number(r.final_time) << " in " << r.steps << " steps\n"
            << "halving events " << r.halving_log.size() << ", limiter activations "
            << r.limiter_activations << "\n"
            << "E_h " << number(r.entropy.front()) << " -> " << number(r.entropy.back())
            << ", max step increase " << number(r.steps ? r.max_entropy_increase : 0.0) << "\n"
            << "max relative mass change per step " << number(r.max_relative_mass_change) << "\n";
  for (std::size_t l = 0; l < r.min_nodal.size(); ++l)
    std::cout << "min rho_" << l + 1 << " " << number(r.min_nodal[l]) << "\n";
  for (const auto& f : res.files) std::cout << "wrote " << f.string() << "\n";
  return 0;
}

std::vector<std::size_t> parse_levels(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
  return out;
}

int cmd_convergence(const std::string& path, const std::vector<std::string>& sets,
                    const std::string& levels_arg, const std::string& out_dir) {
  auto base = load_config(path, sets);
  if (!out_dir.empty()) base.output_dir = out_dir;
  const auto levels = levels_arg.empty() ? base.levels : parse_levels(levels_arg);
  if (levels.size() < 2) throw std::runtime_error("give at least two levels (--levels N1,N2,...)");
  std::vector<int> degrees = base.degrees.empty() ? std::vector<int>{base.k} : base.degrees;
  std::vector<double> mults = base.lf_multipliers.empty()
                                  ? std::vector<double>{base.lf_multiplier}
                                  : base.lf_multipliers;
  for (int k : degrees)
    for (double m : mults) {
      auto cfg = base;
      cfg.k = k;
      cfg.lf_multiplier = m;
      std::string suffix;
      if (base.degrees.size() > 0) suffix += "_k" + std::to_string(k);
      if (base.lf_multipliers.size() > 0) suffix += "_c" + number(m);
      const auto rows = xdflow::run_convergence(cfg, levels);
      const auto p = std::filesystem::path(cfg.output_dir) / (cfg.prefix + suffix + "_errors.csv");
      if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
      std::ofstream os(p, std::ios::binary);
      xdflow::write_error_csv(os, rows);
      std::cout << "# k=" << k << " flux=" << xdflow::to_string(cfg.flux)
                << " lf_multiplier=" << number(m) << " (" << xdflow::to_string(cfg.convergence)
                << ")\n";
      xdflow::write_error_csv(std::cout, rows);
      std::cout << "wrote " << p.string() << "\n";
    }
  return 0;
}

int cmd_list_models() {
  std::cout << "heat                 decoupled heat equations, log entropy (1D, 2D)\n"
               "skt                  SKT population model, log entropy (1D, 2D)\n"
               "tumor                tumor encapsulation; beta, gamma (1D, 2D)\n"
               "surfactant           thin film with surfactant; g (1D, 2D)\n"
               "seawater             seawater intrusion over bedrock; mu (2D)\n"
               "skt2d_manufactured   2D SKT with manufactured source (2D)\n";
  return 0;
}

int cmd_check(std::uint64_t seed, std::size_t samples) {
  using namespace xdflow;
  std::vector<CheckResult> results;
  for (FluxKind kind : {FluxKind::lax_friedrichs, FluxKind::alternating}) {
    results.push_back(check_entropy_identity<HeatModel, 1>(model_heat(), kind, seed, samples));
    results.push_back(check_entropy_identity<SktModel, 1>(model_skt(), kind, seed + 1, samples));
    results.push_back(
        check_entropy_identity<SurfactantModel, 1>(model_surfactant(0.02), kind, seed + 2, samples));
    results.push_back(check_entropy_identity<HeatModel, 2>(model_heat(), kind, seed + 3, samples));
    results.push_back(check_entropy_identity<SktModel, 2>(model_skt(), kind, seed + 4, samples));
    results.push_back(
        check_entropy_identity<SurfactantModel, 2>(model_surfactant(0.02), kind, seed + 5, samples));
  }
  const std::size_t pos = samples * 10;
  results.push_back(check_weak_positivity<HeatModel, 1>(model_heat(), seed + 6, pos));
  results.push_back(check_weak_positivity<SktModel, 1>(model_skt(), seed + 7, pos));
  results.push_back(check_weak_positivity<TumorModel, 1>(model_tumor(0.0075, 10.0), seed + 8, pos));
  results.push_back(check_weak_positivity<SurfactantModel, 1>(model_surfactant(0.02), seed + 9, pos));
  results.push_back(check_weak_positivity<SktModel, 2>(model_skt(), seed + 10, pos));
  results.push_back(check_weak_positivity<SeawaterModel, 2>(model_seawater(0.9), seed + 11, pos));
  results.push_back(check_limiter<1>(seed + 12, pos));
  results.push_back(check_limiter<2>(seed + 13, pos));
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": worst " << number(r.worst)
              << " (tolerance " << number(r.tolerance) << ", " << r.samples << " samples)\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-stable, positivity-preserving DG solver for cross-diffusion systems"};
  app.require_subcommand(1);

  std::vector<std::string> sets;
  std::string solve_cfg, solve_out;
  auto* solve = app.add_subcommand("solve", "Run one configured experiment");
  solve->add_option("config", solve_cfg, "Config file")->required();
  solve->add_option("--output-dir", solve_out, "Override [output] output_dir");
  solve->add_option("--set", sets, "Override a config key (key=value, repeatable)");

  std::string conv_cfg, conv_levels, conv_out;
  auto* conv = app.add_subcommand("convergence", "Error table over mesh levels");
  conv->add_option("config", conv_cfg, "Config file")->required();
  conv->add_option("--levels", conv_levels, "Comma-separated cell counts, ascending");
  conv->add_option("--output-dir", conv_out, "Override [output] output_dir");
  conv->add_option("--set", sets, "Override a config key (key=value, repeatable)");

  auto* list = app.add_subcommand("list-models", "List the built-in models");

  std::uint64_t seed = 20240101;
  std::size_t samples = 100;
  auto* check = app.add_subcommand("check", "Run the randomized property suites");
  check->add_option("--seed", seed, "Random seed");
  check->add_option("--samples", samples, "States per entropy-identity sweep");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve) return cmd_solve(solve_cfg, sets, solve_out);
    if (*conv) return cmd_convergence(conv_cfg, sets, conv_levels, conv_out);
    if (*list) return cmd_list_models();
    if (*check) return cmd_check(seed, samples);
  } catch (const xdflow::StepFailure& e) {
    std::cerr << "run aborted: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
