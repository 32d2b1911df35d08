#include "dk/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "dk/error.hpp"
#include "dk/quadrature.hpp"

namespace dk {

KineticTable kinetic_function(std::span<const double> rho, std::span<const double> xi_levels) {
  for (std::size_t j = 0; j < xi_levels.size(); ++j) {
    if (xi_levels[j] < 0.0) throw InvalidArgument("velocity levels must be non-negative");
    if (j > 0 && !(xi_levels[j] > xi_levels[j - 1]))
      throw InvalidArgument("velocity levels must be strictly increasing");
  }
  KineticTable t;
  t.levels.assign(xi_levels.begin(), xi_levels.end());
  t.cells = rho.size();
  t.chi.resize(t.cells * t.levels.size());
  for (std::size_t i = 0; i < t.cells; ++i)
    for (std::size_t j = 0; j < t.levels.size(); ++j)
      t.chi[i * t.levels.size() + j] = xi_levels[j] <= rho[i] ? 1 : 0;
  return t;
}

KineticTable kinetic_function(const FieldState& state, std::span<const double> xi_levels) {
  return kinetic_function(state.rho, xi_levels);
}

std::vector<double> midpoint_levels(double xi_max, double d_xi) {
  if (!(d_xi > 0.0) || !(xi_max >= 0.0)) throw InvalidArgument("level spacing must be positive");
  const auto n = static_cast<std::size_t>(std::ceil(xi_max / d_xi));
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = (j + 0.5) * d_xi;
  return out;
}

std::vector<double> cell_gradient(std::span<const double> rho, double h) {
  const std::size_t n = rho.size();
  std::vector<double> g(n, 0.0);
  if (n < 2) return g;
  for (std::size_t i = 1; i + 1 < n; ++i) g[i] = (rho[i + 1] - rho[i - 1]) / (2.0 * h);
  g[0] = (rho[1] - rho[0]) / h;
  g[n - 1] = (rho[n - 1] - rho[n - 2]) / h;
  return g;
}

// ---------------------------------------------------------------------------

double KineticHistogram::band_total(std::size_t band) const {
  double s = 0.0;
  for (std::size_t w = 0; w < windows(); ++w) s += at(band, w);
  return s;
}

KineticHistogram& KineticHistogram::operator+=(const KineticHistogram& other) {
  if (other.mass.size() != mass.size() || other.window_edges != window_edges)
    throw InvalidArgument("histograms with different layouts cannot be merged");
  for (std::size_t i = 0; i < mass.size(); ++i) mass[i] += other.mass[i];
  strided = strided || other.strided;
  return *this;
}

void KineticHistogram::scale(double factor) {
  for (double& m : mass) m *= factor;
}

KineticHistogram make_histogram(std::vector<Band> bands, std::vector<double> window_edges) {
  if (window_edges.size() < 2) throw InvalidArgument("need at least one time window");
  for (std::size_t w = 1; w < window_edges.size(); ++w)
    if (!(window_edges[w] > window_edges[w - 1]))
      throw InvalidArgument("time window edges must be increasing");
  for (const auto& b : bands)
    if (!(b.hi > b.lo)) throw InvalidArgument("band must have hi > lo");
  KineticHistogram h;
  h.bands = std::move(bands);
  h.window_edges = std::move(window_edges);
  h.mass.assign(h.bands.size() * h.windows(), 0.0);
  return h;
}

KineticHistogram make_histogram(int dyadic_levels, int unit_levels,
                                std::vector<double> window_edges) {
  std::vector<Band> bands;
  for (int j = 0; j < dyadic_levels; ++j)
    bands.push_back({std::ldexp(1.0, -j - 1), std::ldexp(1.0, -j), BandKind::dyadic});
  for (int M = 0; M < unit_levels; ++M)
    bands.push_back({static_cast<double>(M), M + 1.0, BandKind::unit});
  return make_histogram(std::move(bands), std::move(window_edges));
}

void accumulate_step(KineticHistogram& hist, std::span<const double> rho, double t, double dt,
                     double h, const CoefficientSet& coeffs, double alpha) {
  const auto& e = hist.window_edges;
  if (t < e.front() || t >= e.back()) return;
  const auto w = static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), t) - e.begin() - 1);
  const auto g = cell_gradient(rho, h);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (g[i] == 0.0) continue;
    const double r = rho[i];
    const double q = (coeffs.phi_prime(std::max(r, 0.0)) + alpha) * g[i] * g[i] * h * dt;
    for (std::size_t b = 0; b < hist.bands.size(); ++b)
      if (hist.bands[b].lo <= r && r < hist.bands[b].hi) hist.at(b, w) += q;
  }
}

void accumulate_kinetic_measure(KineticHistogram& hist, const Trajectory& traj, const Grid& grid,
                                const CoefficientSet& coeffs, double alpha) {
  const auto& s = traj.snapshots;
  if (s.size() < traj.dts.size() + 1) hist.strided = true;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    if (s[k].rho.empty()) throw InvalidArgument("trajectory snapshots carry no density");
    accumulate_step(hist, s[k].rho, s[k].t, s[k + 1].t - s[k].t, grid.h(), coeffs, alpha);
  }
}

StepObserver kinetic_observer(KineticHistogram& hist, const Grid& grid,
                              const CoefficientSet& coeffs, double alpha) {
  const double h = grid.h();
  return [&hist, &coeffs, h, alpha](const FieldState& s, double dt, std::span<const double>) {
    accumulate_step(hist, s.rho, s.t, dt, h, coeffs, alpha);
  };
}

std::vector<std::pair<double, double>> decay_at_zero(const KineticHistogram& hist) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t b = 0; b < hist.bands.size(); ++b)
    if (hist.bands[b].kind == BandKind::dyadic) {
      const double beta = hist.bands[b].hi;
      out.emplace_back(beta, hist.band_total(b) / beta);
    }
  return out;
}

std::vector<std::pair<double, double>> vanish_at_infinity(const KineticHistogram& hist) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t b = 0; b < hist.bands.size(); ++b)
    if (hist.bands[b].kind == BandKind::unit) out.emplace_back(hist.bands[b].lo, hist.band_total(b));
  return out;
}

void write_csv(std::ostream& out, const KineticHistogram& hist) {
  out << "band_lo,band_hi,t0,t1,mass\n";
  out.precision(17);
  for (std::size_t b = 0; b < hist.bands.size(); ++b)
    for (std::size_t w = 0; w < hist.windows(); ++w)
      out << hist.bands[b].lo << ',' << hist.bands[b].hi << ',' << hist.window_edges[w] << ','
          << hist.window_edges[w + 1] << ',' << hist.at(b, w) << '\n';
}

// ---------------------------------------------------------------------------

double phi_beta(double xi, double beta) {
  if (xi <= 0.5 * beta) return 0.0;
  if (xi >= beta) return 1.0;
  return (xi - 0.5 * beta) * 2.0 / beta;
}

double zeta_M(double xi, double M) {
  if (xi <= M) return 1.0;
  if (xi >= M + 1.0) return 0.0;
  return M + 1.0 - xi;
}

double smooth_step(double xi, double beta) {
  const double t = (xi - 0.5 * beta) / (0.5 * beta);
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double Phi_beta(double xi, double beta) { return smooth_step(xi, beta) * xi; }

double mollifier(double x, double eps) {
  static const double norm = integrate(
      [](double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }, -1.0, 1.0,
      1e-14);
  const double s = x / eps;
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s)) / (norm * eps);
}

double bump(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double u = 1.0 - s * s;
  return u * u * u;
}

double bump_prime(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double u = 1.0 - s * s;
  return -6.0 * s * u * u;
}

double bump_integral(double s) {
  s = std::clamp(s, -1.0, 1.0);
  const double s2 = s * s;
  return s * (1.0 - s2 + 0.6 * s2 * s2 - s2 * s2 * s2 / 7.0) + 16.0 / 35.0;
}

double TestFunction::operator()(double x, double xi) const {
  return amplitude * bump((x - cx) / rx) * bump((xi - cxi) / rxi);
}

double TestFunction::dx(double x, double xi) const {
  return amplitude * bump_prime((x - cx) / rx) / rx * bump((xi - cxi) / rxi);
}

double TestFunction::dxi(double x, double xi) const {
  return amplitude * bump((x - cx) / rx) * bump_prime((xi - cxi) / rxi) / rxi;
}

double TestFunction::xi_integral(double x, double rho) const {
  return amplitude * bump((x - cx) / rx) * rxi *
         (bump_integral((rho - cxi) / rxi) - bump_integral(-cxi / rxi));
}

bool TestFunction::compactly_supported(double L) const {
  return rx > 0.0 && rxi > 0.0 && cx - rx > 0.0 && cx + rx < L && cxi - rxi > 0.0;
}

// ---------------------------------------------------------------------------

KineticResidualAccumulator::KineticResidualAccumulator(const Grid& grid,
                                                       const CoefficientSet& coeffs,
                                                       const NoiseModel& noise, double alpha,
                                                       const TestFunction& psi, BoundaryData fbar,
                                                       double d_xi)
    : grid_(grid), coeffs_(coeffs), noise_(noise), alpha_(alpha), psi_(psi), d_xi_(d_xi) {
  if (!psi.compactly_supported(grid.extent()))
    throw InvalidArgument("test function must be compactly supported in U x (0, inf)");
  if (!(d_xi > 0.0)) throw InvalidArgument("level spacing must be positive");
  rho_l_ = coeffs.phi_inverse(fbar.left);
  rho_r_ = coeffs.phi_inverse(fbar.right);
}

double KineticResidualAccumulator::chi_integral(std::span<const double> rho) const {
  const auto levels = midpoint_levels(psi_.cxi + psi_.rxi, d_xi_);
  const auto table = kinetic_function(rho, levels);
  const auto x = grid_.centers();
  double s = 0.0;
  for (std::size_t i = 0; i < table.cells; ++i) {
    if (std::abs(x[i] - psi_.cx) >= psi_.rx) continue;
    for (std::size_t j = 0; j < levels.size(); ++j)
      if (table.at(i, j)) s += psi_(x[i], levels[j]);
  }
  return s * grid_.h() * d_xi_;
}

void KineticResidualAccumulator::begin(const FieldState& initial) {
  acc_ = {};
  acc_.chi_0 = chi_integral(initial.rho);
}

void KineticResidualAccumulator::observe(const FieldState& state, double dt,
                                         std::span<const double> dW) {
  const auto& rho = state.rho;
  const std::size_t n = rho.size();
  const double h = grid_.h();
  const auto x = grid_.centers();
  const auto g = cell_gradient(rho, h);
  const int K = noise_.K();
  const auto& cs = coeffs_;

  // Stochastic face flux sigma(rho_face) sum_k f_k dW_k, as in the stepper.
  auto noise_flux = [&](std::size_t f) {
    if (K == 0) return 0.0;
    double xi = 0.0;
    for (int k = 0; k < K; ++k) xi += noise_.f_face[k * (n + 1) + f] * dW[k];
    if (xi == 0.0) return 0.0;
    if (f == 0) return cs.sigma(rho_l_) * xi;
    if (f == n) return cs.sigma(rho_r_) * xi;
    return std::sqrt(std::max(cs.sigma(std::max(rho[f - 1], 0.0)), 0.0) *
                     std::max(cs.sigma(std::max(rho[f], 0.0)), 0.0)) * xi;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(x[i] - psi_.cx) >= psi_.rx) continue;
    const double r = std::max(rho[i], 0.0);
    if (std::abs(r - psi_.cxi) >= psi_.rxi) continue;
    const double p = psi_(x[i], r), px = psi_.dx(x[i], r), pxi = psi_.dxi(x[i], r);
    const double F1 = noise_.F1[i], F2 = noise_.F2[i], F3 = noise_.F3[i];
    const double dphi = cs.phi_prime(r);
    double s = 0.0, sp = 0.0;
    if (F1 != 0.0 || F2 != 0.0 || F3 != 0.0) {
      s = cs.sigma(r);
      sp = cs.sigma_prime(r);
    }
    acc_.flux += dt * h * ((alpha_ + dphi + 0.5 * F1 * sp * sp) * g[i] + 0.5 * sp * s * F2) * px;
    acc_.measure += dt * h * pxi * (dphi + alpha_) * g[i] * g[i];
    acc_.ito -= dt * h * 0.5 * (s * sp * g[i] * F2 + s * s * F3) * pxi;
    if (cs.nu_prime) acc_.drift += dt * h * p * cs.nu_prime(r) * g[i];
    if (K > 0) acc_.martingale += p * (noise_flux(i + 1) - noise_flux(i));
  }
}

KineticResidual KineticResidualAccumulator::finish(const FieldState& final_state) const {
  KineticResidual r = acc_;
  r.chi_t = chi_integral(final_state.rho);
  r.residual = r.chi_t - r.chi_0 + r.flux + r.measure + r.ito + r.martingale + r.drift;
  return r;
}

StepObserver KineticResidualAccumulator::observer() {
  return [this](const FieldState& s, double dt, std::span<const double> dW) { observe(s, dt, dW); };
}

KineticResidual kinetic_equation_residual(const Trajectory& traj, const TestFunction& psi,
                                          const Grid& grid, const CoefficientSet& coeffs,
                                          const NoiseModel& noise, double alpha,
                                          BoundaryData fbar, double d_xi) {
  const std::size_t steps = traj.dts.size();
  const auto K = static_cast<std::size_t>(noise.K());
  if (traj.snapshots.size() != steps + 1)
    throw InvalidArgument("residual needs one snapshot per step");
  if (traj.increments.size() != steps * K)
    throw InvalidArgument("residual needs the recorded noise increments");
  KineticResidualAccumulator acc(grid, coeffs, noise, alpha, psi, fbar, d_xi);
  FieldState s;
  s.rho = traj.snapshots.front().rho;
  acc.begin(s);
  for (std::size_t k = 0; k < steps; ++k) {
    s.rho = traj.snapshots[k].rho;
    s.t = traj.snapshots[k].t;
    acc.observe(s, traj.dts[k], std::span<const double>(traj.increments).subspan(k * K, K));
  }
  s.rho = traj.snapshots.back().rho;
  return acc.finish(s);
}

IbpCheck integration_by_parts_check(std::span<const double> rho, const Grid& grid,
                                    const TestFunction& psi, double d_xi) {
  if (!psi.compactly_supported(grid.extent()))
    throw InvalidArgument("test function must be compactly supported in U x (0, inf)");
  const double h = grid.h();
  const auto x = grid.centers();
  const auto levels = midpoint_levels(psi.cxi + psi.rxi, d_xi);
  const auto table = kinetic_function(rho, levels);
  const auto g = cell_gradient(rho, h);
  IbpCheck c;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    for (std::size_t j = 0; j < levels.size(); ++j)
      if (table.at(i, j)) c.lhs += psi.dx(x[i], levels[j]) * h * d_xi;
    c.rhs -= psi(x[i], std::max(rho[i], 0.0)) * g[i] * h;
  }
  c.discrepancy = std::abs(c.lhs - c.rhs);
  return c;
}

}  // namespace dk
