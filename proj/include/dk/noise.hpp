#pragma once

#include <vector>

#include "dk/domain.hpp"

namespace dk {

/// Truncated correlated noise sum_k f_k(x) B^k_t with f_k(x) = a_k sin(k pi x / L),
/// a_k = scale * k^{-p}. Mode values and the derived fields
///   F1 = sum f_k^2,  F2 = sum f_k f_k',  F3 = sum (f_k')^2
/// are tabulated at cell centres and at faces.
class NoiseModel {
 public:
  NoiseModel() = default;
  NoiseModel(const Grid& grid, int K, double decay_p, double amplitude_scale = 1.0);

  int K() const noexcept { return K_; }
  double decay_p() const noexcept { return p_; }
  double amplitude_scale() const noexcept { return scale_; }
  double length() const noexcept { return L_; }
  const std::vector<double>& amplitudes() const noexcept { return a_; }

  double f(int k, double x) const;       // k is 0-based: mode k+1
  double df(int k, double x) const;
  double F1_at(double x) const;
  double F2_at(double x) const;
  double F3_at(double x) const;
  double div_F2_at(double x) const;      // closed form for the sine family

  // Tabulated at cell centres.
  std::vector<double> F1, F2, F3, div_F2;
  // Tabulated at the n+1 faces; f_face is K x (n+1), row-major by mode.
  std::vector<double> F1_face, F2_face;
  std::vector<double> f_face;

 private:
  int K_ = 0;
  double p_ = 0.0, scale_ = 1.0, L_ = 1.0;
  std::vector<double> a_;
};

NoiseModel make_sine_modes(const Grid& grid, int K, double decay_p, double amplitude_scale = 1.0);

struct NoiseReport {
  double max_F1 = 0.0, max_abs_F2 = 0.0, max_F3 = 0.0, max_abs_div_F2 = 0.0;
  // Bounds on sum_{k>K} a_k^2 (truncation error of F1) and of sum_{k>K} a_k^2 (k pi / L)^2.
  double tail_F1 = 0.0, tail_F3 = 0.0;
  bool fields_nonnegative = true;
  bool cauchy_schwarz = true;  // F2^2 <= F1 F3 cellwise
  bool pass = true;
};

NoiseReport check_noise_assumptions(const NoiseModel& model);

}  // namespace dk
