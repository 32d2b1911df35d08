#include "dk/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dk/error.hpp"

namespace dk {

NoiseModel::NoiseModel(const Grid& grid, int K, double decay_p, double amplitude_scale)
    : K_(K), p_(decay_p), scale_(amplitude_scale), L_(grid.extent(0)) {
  if (grid.dimension() != 1) throw InvalidArgument("noise modes are defined on the interval only");
  if (K < 0) throw InvalidArgument("mode count K must be non-negative");
  if (K > 0 && decay_p < 0.0)
    throw InvalidArgument("decay exponent p < 0 makes F3 diverge as K grows");
  if (!std::isfinite(amplitude_scale)) throw InvalidArgument("amplitude scale must be finite");

  a_.resize(K);
  for (int k = 0; k < K; ++k) a_[k] = scale_ * std::pow(k + 1.0, -p_);

  const auto centers = grid.centers(0);
  const auto faces = grid.faces(0);
  const std::size_t n = centers.size();
  F1.resize(n);
  F2.resize(n);
  F3.resize(n);
  div_F2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    F1[i] = F1_at(centers[i]);
    F2[i] = F2_at(centers[i]);
    F3[i] = F3_at(centers[i]);
    div_F2[i] = div_F2_at(centers[i]);
  }
  F1_face.resize(n + 1);
  F2_face.resize(n + 1);
  f_face.resize(static_cast<std::size_t>(K) * (n + 1));
  for (std::size_t i = 0; i <= n; ++i) {
    F1_face[i] = F1_at(faces[i]);
    F2_face[i] = F2_at(faces[i]);
    for (int k = 0; k < K; ++k) f_face[k * (n + 1) + i] = f(k, faces[i]);
  }
}

double NoiseModel::f(int k, double x) const {
  return a_[k] * std::sin((k + 1) * std::numbers::pi * x / L_);
}

double NoiseModel::df(int k, double x) const {
  const double w = (k + 1) * std::numbers::pi / L_;
  return a_[k] * w * std::cos(w * x);
}

double NoiseModel::F1_at(double x) const {
  double s = 0.0;
  for (int k = 0; k < K_; ++k) s += f(k, x) * f(k, x);
  return s;
}

double NoiseModel::F2_at(double x) const {
  double s = 0.0;
  for (int k = 0; k < K_; ++k) s += f(k, x) * df(k, x);
  return s;
}

double NoiseModel::F3_at(double x) const {
  double s = 0.0;
  for (int k = 0; k < K_; ++k) s += df(k, x) * df(k, x);
  return s;
}

double NoiseModel::div_F2_at(double x) const {
  double s = 0.0;
  for (int k = 0; k < K_; ++k) {
    const double w = (k + 1) * std::numbers::pi / L_;
    s += a_[k] * a_[k] * w * w * std::cos(2.0 * w * x);
  }
  return s;
}

NoiseModel make_sine_modes(const Grid& grid, int K, double decay_p, double amplitude_scale) {
  return NoiseModel(grid, K, decay_p, amplitude_scale);
}

NoiseReport check_noise_assumptions(const NoiseModel& model) {
  NoiseReport r;
  for (std::size_t i = 0; i < model.F1.size(); ++i) {
    r.max_F1 = std::max(r.max_F1, model.F1[i]);
    r.max_abs_F2 = std::max(r.max_abs_F2, std::abs(model.F2[i]));
    r.max_F3 = std::max(r.max_F3, model.F3[i]);
    r.max_abs_div_F2 = std::max(r.max_abs_div_F2, std::abs(model.div_F2[i]));
    if (model.F1[i] < 0.0 || model.F3[i] < 0.0) r.fields_nonnegative = false;
    const double cs = model.F1[i] * model.F3[i];
    if (model.F2[i] * model.F2[i] > cs * (1.0 + 1e-12) + 1e-300) r.cauchy_schwarz = false;
  }
  if (model.K() > 0) {
    const double K = model.K(), p = model.decay_p(), s2 = model.amplitude_scale() * model.amplitude_scale();
    const double inf = std::numeric_limits<double>::infinity();
    const double w2 = std::pow(std::numbers::pi / model.length(), 2);
    r.tail_F1 = p > 0.5 ? s2 * std::pow(K, 1.0 - 2.0 * p) / (2.0 * p - 1.0) : inf;
    r.tail_F3 = p > 1.5 ? s2 * w2 * std::pow(K, 3.0 - 2.0 * p) / (2.0 * p - 3.0) : inf;
  }
  r.pass = r.fields_nonnegative && r.cauchy_schwarz && std::isfinite(r.max_F1) &&
           std::isfinite(r.max_F3) && std::isfinite(r.max_abs_div_F2);
  return r;
}

}  // namespace dk
