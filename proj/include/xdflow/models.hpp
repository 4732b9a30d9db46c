#ifndef XDFLOW_MODELS_HPP_
#define XDFLOW_MODELS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "xdflow/mesh.hpp"

namespace xdflow {

template <std::size_t M>
using Vec = std::array<double, M>;

template <std::size_t M>
using Mat = std::array<std::array<double, M>, M>;

/// Floor applied inside logarithms of entropy variables.
inline constexpr double kLogFloor = 1e-14;

inline double guarded_log(double v) noexcept { return std::log(std::max(v, kLogFloor)); }

/// A cross-diffusion gradient-flow system
///   d_t rho = div(F(rho) grad xi(rho)) + s,   xi = de/drho,  F = diag(rho) G.
/// The mobility is exposed through the scaled factor G so that the velocity
/// v = diag(rho)^{-1} F u = G u never divides by rho.
template <class T>
concept GradientFlowModel = requires(const T& model, const Vec<T::components>& rho,
                                     Point p, double t) {
  { T::components } -> std::convertible_to<std::size_t>;
  { model.entropy(rho, p) } -> std::convertible_to<double>;
  { model.entropy_variables(rho, p) } -> std::same_as<Vec<T::components>>;
  { model.scaled_mobility(rho) } -> std::same_as<Mat<T::components>>;
  { model.has_source() } -> std::convertible_to<bool>;
  { model.source(p, t) } -> std::same_as<Vec<T::components>>;
  { model.name() } -> std::convertible_to<std::string_view>;
};

template <std::size_t M>
Vec<M> mat_vec(const Mat<M>& a, const Vec<M>& x) noexcept {
  Vec<M> y{};
  for (std::size_t i = 0; i < M; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < M; ++j) s += a[i][j] * x[j];
    y[i] = s;
  }
  return y;
}

/// F(rho) = diag(rho) G(rho)
template <GradientFlowModel Model>
Mat<Model::components> full_mobility(const Model& model, const Vec<Model::components>& rho) {
  auto g = model.scaled_mobility(rho);
  for (std::size_t i = 0; i < Model::components; ++i)
    for (auto& v : g[i]) v *= rho[i];
  return g;
}

/// v = G(rho) u, the velocity diag(rho)^{-1} F(rho) u.
template <GradientFlowModel Model>
Vec<Model::components> mobility_velocity(const Model& model,
                                         const Vec<Model::components>& rho,
                                         const Vec<Model::components>& u) {
  return mat_vec(model.scaled_mobility(rho), u);
}

// ---------------------------------------------------------------------------
// Built-in systems

/// Two decoupled heat equations with logarithmic entropy.
struct HeatModel {
  static constexpr std::size_t components = 2;
  static constexpr std::string_view model_name = "heat";

  [[nodiscard]] std::string_view name() const noexcept { return model_name; }
  [[nodiscard]] double entropy(const Vec<2>& rho, Point) const noexcept {
    return rho[0] * (guarded_log(rho[0]) - 1.0) + rho[1] * (guarded_log(rho[1]) - 1.0);
  }
  [[nodiscard]] Vec<2> entropy_variables(const Vec<2>& rho, Point) const noexcept {
    return {guarded_log(rho[0]), guarded_log(rho[1])};
  }
  [[nodiscard]] Mat<2> scaled_mobility(const Vec<2>&) const noexcept {
    return {{{1.0, 0.0}, {0.0, 1.0}}};
  }
  [[nodiscard]] bool has_source() const noexcept { return false; }
  [[nodiscard]] Vec<2> source(Point, double) const noexcept { return {0.0, 0.0}; }
  [[nodiscard]] bool bounded_mobility() const noexcept { return true; }
};

/// Shigesada-Kawashima-Teramoto population model with unit coefficients.
struct SktModel {
  static constexpr std::size_t components = 2;
  static constexpr std::string_view model_name = "skt";

  [[nodiscard]] std::string_view name() const noexcept { return model_name; }
  [[nodiscard]] double entropy(const Vec<2>& rho, Point) const noexcept {
    return rho[0] * (guarded_log(rho[0]) - 1.0) + rho[1] * (guarded_log(rho[1]) - 1.0);
  }
  [[nodiscard]] Vec<2> entropy_variables(const Vec<2>& rho, Point) const noexcept {
    return {guarded_log(rho[0]), guarded_log(rho[1])};
  }
  [[nodiscard]] Mat<2> scaled_mobility(const Vec<2>& rho) const noexcept {
    return {{{2.0 * rho[0] + rho[1], rho[1]}, {rho[0], 2.0 * rho[1] + rho[0]}}};
  }
  [[nodiscard]] bool has_source() const noexcept { return false; }
  [[nodiscard]] Vec<2> source(Point, double) const noexcept { return {0.0, 0.0}; }
  [[nodiscard]] bool bounded_mobility() const noexcept { return true; }
};

/// Tumor encapsulation model. The entropy includes the void fraction
/// sigma = 1 - rho_1 - rho_2; G is diag(rho)^{-1} A (D xi)^{-1} expanded into
/// polynomials, with A the divergence-form coefficient matrix.
struct TumorModel {
  static constexpr std::size_t components = 2;
  static constexpr std::string_view model_name = "tumor";

  double beta = 0.0075;
  double gamma = 10.0;

  TumorModel() = default;
  TumorModel(double beta_, double gamma_) : beta(beta_), gamma(gamma_) {
    if (!(beta > 0.0)) throw std::invalid_argument("tumor model requires beta > 0");
    if (!(gamma >= 0.0)) throw std::invalid_argument("tumor model requires gamma >= 0");
  }

  [[nodiscard]] std::string_view name() const noexcept { return model_name; }

  /// The entropy structure holds only for gamma < 4 / sqrt(beta).
  [[nodiscard]] bool entropy_structure_valid() const noexcept {
    return gamma < 4.0 / std::sqrt(beta);
  }

  [[nodiscard]] double entropy(const Vec<2>& rho, Point) const noexcept {
    const double sigma = 1.0 - rho[0] - rho[1];
    return rho[0] * (guarded_log(rho[0]) - 1.0) + rho[1] * (guarded_log(rho[1]) - 1.0) +
           sigma * (guarded_log(sigma) - 1.0);
  }
  [[nodiscard]] Vec<2> entropy_variables(const Vec<2>& rho, Point) const noexcept {
    const double ls = guarded_log(1.0 - rho[0] - rho[1]);
    return {guarded_log(rho[0]) - ls, guarded_log(rho[1]) - ls};
  }
  /// Divergence-form coefficient: d_t rho = d_x (A(rho) d_x rho).
  [[nodiscard]] Mat<2> diffusion_matrix(const Vec<2>& rho) const noexcept {
    const double r1 = rho[0];
    const double r2 = rho[1];
    return {{{2.0 * r1 * (1.0 - r1) - beta * gamma * r1 * r2 * r2,
              -2.0 * beta * r1 * r2 * (1.0 + gamma * r1)},
             {-2.0 * r1 * r2 + beta * gamma * (1.0 - r2) * r2 * r2,
              2.0 * beta * r2 * (1.0 - r2) * (1.0 + gamma * r1)}}};
  }
  [[nodiscard]] Mat<2> scaled_mobility(const Vec<2>& rho) const noexcept {
    const double r1 = rho[0];
    const double r2 = rho[1];
    const double a11 = 2.0 * r1 * (1.0 - r1) - beta * gamma * r1 * r2 * r2;
    const double a21 = -2.0 * r1 * r2 + beta * gamma * (1.0 - r2) * r2 * r2;
    const double p = 1.0 + gamma * r1;
    return {{{a11 * (1.0 - r1) + 2.0 * beta * r1 * r2 * r2 * p,
              -r2 * a11 - 2.0 * beta * r2 * r2 * p * (1.0 - r2)},
             {r1 * (1.0 - r1) * (-2.0 * r1 + beta * gamma * (1.0 - r2) * r2) -
                  2.0 * beta * r1 * r2 * (1.0 - r2) * p,
              -r1 * a21 + 2.0 * beta * r2 * (1.0 - r2) * (1.0 - r2) * p}}};
  }
  [[nodiscard]] bool has_source() const noexcept { return false; }
  [[nodiscard]] Vec<2> source(Point, double) const noexcept { return {0.0, 0.0}; }
  [[nodiscard]] bool bounded_mobility() const noexcept { return true; }
};

/// Insoluble surfactant spreading on a thin film; rho_1 film height, rho_2
/// surfactant concentration, g gravity.
struct SurfactantModel {
  static constexpr std::size_t components = 2;
  static constexpr std::string_view model_name = "surfactant";

  double g = 0.02;

  SurfactantModel() = default;
  explicit SurfactantModel(double g_) : g(g_) {
    if (!(g >= 0.0)) throw std::invalid_argument("surfactant model requires g >= 0");
  }

  [[nodiscard]] std::string_view name() const noexcept { return model_name; }
  [[nodiscard]] double entropy(const Vec<2>& rho, Point) const noexcept {
    return 0.5 * g * rho[0] * rho[0] + rho[1] * (guarded_log(rho[1]) - 1.0);
  }
  [[nodiscard]] Vec<2> entropy_variables(const Vec<2>& rho, Point) const noexcept {
    return {g * rho[0], guarded_log(rho[1])};
  }
  [[nodiscard]] Mat<2> scaled_mobility(const Vec<2>& rho) const noexcept {
    const double r1 = rho[0];
    const double r2 = rho[1];
    return {{{r1 * r1 / 3.0, 0.5 * r1 * r2}, {0.5 * r1 * r1, r1 * r2}}};
  }
  [[nodiscard]] bool has_source() const noexcept { return false; }
  [[nodiscard]] Vec<2> source(Point, double) const noexcept { return {0.0, 0.0}; }
  [[nodiscard]] bool bounded_mobility() const noexcept { return true; }
};

/// Default seabed profile max(0, 0.5 (1 - 16 (x - 0.5)^2) (cos(pi y) + 2)).
inline double default_bedrock(double x, double y) {
  return std::max(0.0, 0.5 * (1.0 - 16.0 * (x - 0.5) * (x - 0.5)) *
                           (std::cos(std::numbers::pi * y) + 2.0));
}

/// Fresh/salt water in an unconfined aquifer over bedrock b(x, y); rho_1 is
/// the freshwater layer, rho_2 the saltwater layer, mu the density ratio.
struct SeawaterModel {
  static constexpr std::size_t components = 2;
  static constexpr std::string_view model_name = "seawater";

  double mu = 0.9;
  std::function<double(double, double)> bedrock = default_bedrock;

  SeawaterModel() = default;
  explicit SeawaterModel(double mu_ratio,
                         std::function<double(double, double)> b = default_bedrock)
      : mu(mu_ratio), bedrock(std::move(b)) {
    if (!(mu > 0.0 && mu < 1.0))
      throw std::invalid_argument("seawater model requires 0 < mu_ratio < 1");
  }

  [[nodiscard]] std::string_view name() const noexcept { return model_name; }
  [[nodiscard]] double entropy(const Vec<2>& rho, Point p) const {
    const double b = bedrock(p.x, p.y);
    const double top = rho[0] + rho[1] + b;
    const double salt = rho[1] + b;
    return 0.5 * mu * top * top + 0.5 * (1.0 - mu) * salt * salt;
  }
  [[nodiscard]] Vec<2> entropy_variables(const Vec<2>& rho, Point p) const {
    const double b = bedrock(p.x, p.y);
    return {mu * (rho[0] + rho[1] + b), mu * rho[0] + rho[1] + b};
  }
  [[nodiscard]] Mat<2> scaled_mobility(const Vec<2>&) const noexcept {
    return {{{1.0, 0.0}, {0.0, 1.0}}};
  }
  [[nodiscard]] bool has_source() const noexcept { return false; }
  [[nodiscard]] Vec<2> source(Point, double) const noexcept { return {0.0, 0.0}; }
  [[nodiscard]] bool bounded_mobility() const noexcept { return true; }
};

/// Two-dimensional SKT system with a manufactured source so that
///   rho = (0.5 sin(pi (x + y + t)) + 1, 0.5 cos(pi (x - y - t/2)) + 1)
/// is an exact solution. The source was derived by hand from the identity
///   div(A grad rho) = (lap(rho_1^2 + rho_1 rho_2), lap(rho_2^2 + rho_1 rho_2)).
struct SktManufacturedModel {
  static constexpr std::size_t components = 2;
  static constexpr std::string_view model_name = "skt2d_manufactured";

  SktModel base;

  [[nodiscard]] std::string_view name() const noexcept { return model_name; }
  [[nodiscard]] double entropy(const Vec<2>& rho, Point p) const noexcept {
    return base.entropy(rho, p);
  }
  [[nodiscard]] Vec<2> entropy_variables(const Vec<2>& rho, Point p) const noexcept {
    return base.entropy_variables(rho, p);
  }
  [[nodiscard]] Mat<2> scaled_mobility(const Vec<2>& rho) const noexcept {
    return base.scaled_mobility(rho);
  }
  [[nodiscard]] bool bounded_mobility() const noexcept { return true; }
  [[nodiscard]] bool has_source() const noexcept { return true; }

  static Vec<2> exact(Point p, double t) noexcept {
    constexpr double pi = std::numbers::pi;
    return {0.5 * std::sin(pi * (p.x + p.y + t)) + 1.0,
            0.5 * std::cos(pi * (p.x - p.y - 0.5 * t)) + 1.0};
  }

  [[nodiscard]] Vec<2> source(Point p, double t) const noexcept {
    constexpr double pi = std::numbers::pi;
    constexpr double pi2 = pi * pi;
    const double a = pi * (p.x + p.y + t);
    const double b = pi * (p.x - p.y - 0.5 * t);
    const double sa = std::sin(a);
    const double ca = std::cos(a);
    const double sb = std::sin(b);
    const double cb = std::cos(b);
    const double r1 = 0.5 * sa + 1.0;
    const double r2 = 0.5 * cb + 1.0;
    // grad rho_1 . grad rho_2 vanishes identically for this pair.
    const double lap_r1r2 = -pi2 * (r1 * cb + r2 * sa);
    const double lap_r1sq = pi2 * ca * ca - 2.0 * pi2 * r1 * sa;
    const double lap_r2sq = pi2 * sb * sb - 2.0 * pi2 * r2 * cb;
    return {0.5 * pi * ca - (lap_r1sq + lap_r1r2), 0.25 * pi * sb - (lap_r2sq + lap_r1r2)};
  }
};

inline HeatModel model_heat() { return {}; }
inline SktModel model_skt() { return {}; }
inline TumorModel model_tumor(double beta, double gamma) { return {beta, gamma}; }
inline SurfactantModel model_surfactant(double g) { return SurfactantModel{g}; }
inline SeawaterModel model_seawater(double mu_ratio,
                                    std::function<double(double, double)> b = default_bedrock) {
  return SeawaterModel{mu_ratio, std::move(b)};
}
inline SktManufacturedModel model_skt_2d_manufactured() { return {}; }

}  // namespace xdflow

#endif  // XDFLOW_MODELS_HPP_
