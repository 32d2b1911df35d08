#include "dk/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dk/error.hpp"

namespace dk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class End { zero, infinity };

// Fitted upper constant sup ratio over the samples, with growth detection at
// one end: the per-decade suprema of the last three decades must not grow
// geometrically (factor > 1.5 twice in a row).
struct Fit {
  double c = 0.0;
  double witness = 0.0;
  bool finite = true;
  bool diverging = false;
};

Fit fit_upper(std::span<const double> xi, std::span<const double> ratio, End end) {
  Fit fit;
  std::map<int, double> decade_sup;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double r = ratio[i];
    if (std::isnan(r) || std::isinf(r)) {
      if (fit.finite) fit.witness = xi[i];
      fit.finite = false;
      continue;
    }
    if (r > fit.c && fit.finite) {
      fit.c = r;
      fit.witness = xi[i];
    }
    const int d = static_cast<int>(std::floor(std::log10(xi[i]) + 1e-12));
    auto [it, inserted] = decade_sup.try_emplace(d, r);
    if (!inserted) it->second = std::max(it->second, r);
  }
  if (!fit.finite) {
    fit.c = kInf;
    return fit;
  }
  std::vector<double> sups;
  for (const auto& [d, s] : decade_sup) sups.push_back(s);
  if (end == End::zero) std::reverse(sups.begin(), sups.end());
  if (sups.size() >= 3) {
    const double a = sups[sups.size() - 3], b = sups[sups.size() - 2], c = sups.back();
    fit.diverging = a > 0.0 && b > 1.5 * a && c > 1.5 * b;
  }
  if (fit.diverging) fit.c = kInf;
  return fit;
}

AssumptionItem from_fit(std::string id, const Fit& fit, std::string note = {}) {
  AssumptionItem item;
  item.id = std::move(id);
  item.pass = fit.finite && !fit.diverging;
  item.constant = fit.c;
  item.witness = fit.witness;
  item.note = std::move(note);
  if (!fit.finite) item.note = "non-finite ratio";
  else if (fit.diverging) item.note = "ratio grows without bound";
  return item;
}

template <class F>
std::vector<double> tabulate(std::span<const double> xi, F&& f) {
  std::vector<double> out(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) out[i] = f(xi[i]);
  return out;
}

double zero_or(const ScalarFn& f, double x) { return f ? f(x) : 0.0; }

std::vector<double> sorted_positive(std::span<const double> xi_grid) {
  std::vector<double> xi;
  for (double x : xi_grid)
    if (x > 0.0 && std::isfinite(x)) xi.push_back(x);
  std::sort(xi.begin(), xi.end());
  xi.erase(std::unique(xi.begin(), xi.end()), xi.end());
  if (xi.size() < 2) throw InvalidArgument("assumption grid needs at least two positive points");
  return xi;
}

AssumptionItem monotone_item(std::string id, const CoefficientSet& set,
                             std::span<const double> xi) {
  AssumptionItem item{std::move(id), true, 0.0, 0.0, {}};
  const double phi0 = set.phi(0.0);
  if (!(std::abs(phi0) <= 1e-14)) {
    item.pass = false;
    item.note = "phi(0) != 0";
    item.constant = phi0;
    return item;
  }
  double prev = phi0;
  for (double x : xi) {
    const double v = set.phi(x);
    if (!(v > prev)) {
      item.pass = false;
      item.witness = x;
      item.note = "phi not strictly increasing";
      return item;
    }
    prev = v;
  }
  return item;
}

// sup_{xi' <= xi} g(xi') <= c (1 + xi + h(xi)).
AssumptionItem running_sup_item(std::string id, std::span<const double> xi,
                                const std::vector<double>& g, const std::vector<double>& h) {
  std::vector<double> ratio(xi.size());
  double run = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    run = std::max(run, g[i]);
    ratio[i] = run / (1.0 + xi[i] + h[i]);
  }
  auto item = from_fit(std::move(id), fit_upper(xi, ratio, End::infinity));
  if (item.pass) item.constant = std::max(item.constant, 1.0);
  return item;
}

}  // namespace

bool AssumptionReport::all_pass() const {
  return std::all_of(items.begin(), items.end(), [](const auto& i) { return i.pass; });
}

const AssumptionItem& AssumptionReport::item(const std::string& id) const {
  for (const auto& i : items)
    if (i.id == id) return i;
  throw InvalidArgument("no assumption item '" + id + "'");
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0 && hi > lo) || per_decade < 1)
    throw InvalidArgument("log grid needs 0 < lo < hi and per_decade >= 1");
  const double decades = std::log10(hi / lo);
  const int n = static_cast<int>(std::ceil(decades * per_decade));
  std::vector<double> out(n + 1);
  for (int i = 0; i <= n; ++i) out[i] = lo * std::pow(10.0, decades * i / n);
  out.back() = hi;
  return out;
}

AssumptionReport validate_uniqueness_assumptions(const CoefficientSet& set,
                                                 std::span<const double> xi_grid) {
  const auto xi = sorted_positive(xi_grid);
  AssumptionReport r;
  r.name = "uniqueness";
  r.items.push_back(monotone_item("2", set, xi));

  {
    // limsup at 0: only the part of the grid below 1 matters.
    std::vector<double> lo;
    for (double x : xi)
      if (x <= 1.0) lo.push_back(x);
    if (lo.size() < 2) lo.assign(xi.begin(), xi.begin() + 2);
    const auto ratio = tabulate(lo, [&](double x) {
      const double s = set.sigma(x);
      return s * s / x;
    });
    r.items.push_back(from_fit("3", fit_upper(lo, ratio, End::zero)));
  }

  const auto sig2 = tabulate(xi, [&](double x) { return std::pow(set.sigma(x), 2); });
  r.items.push_back(running_sup_item("4", xi, sig2, sig2));
  const auto nu = tabulate(xi, [&](double x) { return std::abs(zero_or(set.nu, x)); });
  r.items.push_back(running_sup_item("5", xi, nu, nu));
  return r;
}

AssumptionReport validate_existence_assumptions(const CoefficientSet& set, const NoiseModel& noise,
                                                const BoundaryData& fbar,
                                                std::span<const double> xi_grid) {
  if (!(fbar.left >= 0.0 && fbar.right >= 0.0))
    throw InvalidArgument("boundary data must be non-negative");
  const auto xi = sorted_positive(xi_grid);
  const double m = set.m;
  AssumptionReport r;
  r.name = "existence";

  const auto phi = tabulate(xi, [&](double x) { return set.phi(x); });
  const auto dphi = tabulate(xi, [&](double x) { return set.phi_prime(x); });
  const auto sig = tabulate(xi, [&](double x) { return set.sigma(x); });
  const auto dsig = tabulate(xi, [&](double x) { return set.sigma_prime(x); });
  const auto nu = tabulate(xi, [&](double x) { return zero_or(set.nu, x); });
  std::vector<double> base(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) base[i] = 1.0 + xi[i] + phi[i];

  auto ratio_item = [&](std::string id, auto&& num, auto&& den, End end) {
    std::vector<double> ratio(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) ratio[i] = num(i) / den(i);
    return from_fit(std::move(id), fit_upper(xi, ratio, end));
  };
  auto both_ends = [&](std::string id, auto&& num, auto&& den) {
    auto a = ratio_item(id, num, den, End::infinity);
    const auto b = ratio_item(id, num, den, End::zero);
    if (!b.pass) return b;
    return a;
  };

  // 1
  {
    AssumptionItem item{"1", true, 0.0, 0.0, {}};
    if (std::abs(set.phi(0.0)) > 1e-14) item = {"1", false, set.phi(0.0), 0.0, "phi(0) != 0"};
    else if (std::abs(set.sigma(0.0)) > 1e-14)
      item = {"1", false, set.sigma(0.0), 0.0, "sigma(0) != 0"};
    else
      for (std::size_t i = 0; i < xi.size(); ++i)
        if (!(dphi[i] > 0.0)) {
          item = {"1", false, dphi[i], xi[i], "phi' not positive"};
          break;
        }
    r.items.push_back(item);
  }
  // 2
  r.items.push_back(ratio_item(
      "2", [&](std::size_t i) { return phi[i]; },
      [&](std::size_t i) { return 1.0 + std::pow(xi[i], m); }, End::infinity));
  // 3
  r.items.push_back(both_ends(
      "3", [&](std::size_t i) { return dphi[i]; }, [&](std::size_t i) { return base[i]; }));
  // 4: (a) phi'^{-1/2} <= c xi^theta for some theta in [0, 1/2], or
  //    (b) |xi - eta|^q <= c |Theta(xi) - Theta(eta)|^2 with q = max(1, m + 1).
  {
    AssumptionItem best{"4", false, kInf, 0.0, "no admissible branch"};
    for (int t = 0; t <= 50 && !best.pass; ++t) {
      const double theta = t / 100.0;
      auto it = both_ends(
          "4", [&](std::size_t i) { return 1.0 / std::sqrt(dphi[i]); },
          [&](std::size_t i) { return std::pow(xi[i], theta); });
      if (it.pass) {
        best = it;
        best.note = "theta = " + std::to_string(theta);
      }
    }
    if (!best.pass) {
      const double q = std::max(1.0, m + 1.0);
      // Pairs (eta, xi) with eta < xi; witnessed by the larger point.
      std::vector<double> sub;
      for (std::size_t i = 0; i < xi.size(); i += std::max<std::size_t>(1, xi.size() / 80))
        sub.push_back(xi[i]);
      std::vector<double> th(sub.size());
      for (std::size_t i = 0; i < sub.size(); ++i) th[i] = set.theta_phi(sub[i]);
      std::vector<double> ratio(sub.size(), 0.0);
      for (std::size_t i = 0; i < sub.size(); ++i) {
        double worst = std::pow(sub[i], q) / (th[i] * th[i]);  // eta = 0
        for (std::size_t j = 0; j < i; ++j) {
          const double d = th[i] - th[j];
          worst = std::max(worst, std::pow(sub[i] - sub[j], q) / (d * d));
        }
        ratio[i] = worst;
      }
      auto it = from_fit("4", fit_upper(sub, ratio, End::infinity));
      if (it.pass) {
        best = it;
        best.note = "q = " + std::to_string(q);
      }
    }
    r.items.push_back(best);
  }
  // 5
  r.items.push_back(ratio_item(
      "5", [&](std::size_t i) { return sig[i] * sig[i]; },
      [&](std::size_t i) { return base[i]; }, End::infinity));
  // 6 at delta = 0.1 and 0.01
  {
    AssumptionItem item{"6", true, 0.0, 0.0, {}};
    for (double delta : {0.1, 0.01}) {
      std::vector<double> x6, ratio;
      for (std::size_t i = 0; i < xi.size(); ++i)
        if (xi[i] > delta) {
          x6.push_back(xi[i]);
          ratio.push_back(std::pow(dsig[i], 4) / dphi[i] / base[i]);
        }
      if (x6.size() < 2) continue;
      const auto it = from_fit("6", fit_upper(x6, ratio, End::infinity));
      item.note += (item.note.empty() ? "" : ", ") + std::string("c(") +
                   (delta == 0.1 ? "0.1" : "0.01") + ") = " + std::to_string(it.constant);
      if (!it.pass) {
        item.pass = false;
        item.witness = it.witness;
      }
      if (delta == 0.01) item.constant = it.constant;
    }
    r.items.push_back(item);
  }
  // 7: lower bound; fitted c = inf of Theta / (xi^{(m+1)/2} - 1) where the bracket exceeds 1/2.
  {
    const double p = (m + 1.0) / 2.0;
    std::vector<double> x7, inv;
    double c = kInf, w = 0.0;
    bool ok = true;
    for (double x : xi) {
      const double th = set.theta_phi(x);
      if (!(th >= 0.0) || !std::isfinite(th)) {
        ok = false;
        w = x;
        break;
      }
      const double rhs = std::pow(x, p) - 1.0;
      if (rhs <= 0.5) continue;
      x7.push_back(x);
      inv.push_back(rhs / std::max(th, 1e-300));
      if (th / rhs < c) {
        c = th / rhs;
        w = x;
      }
    }
    AssumptionItem item{"7", ok, c, w, {}};
    if (ok && x7.size() >= 2) {
      const auto fit = fit_upper(x7, inv, End::infinity);
      if (!fit.finite || fit.diverging) {
        item.pass = false;
        item.constant = 0.0;
        item.note = "Theta_Phi grows slower than xi^((m+1)/2)";
      }
    }
    if (!ok) item.note = "Theta_Phi negative or non-finite";
    r.items.push_back(item);
  }
  // 8
  r.items.push_back(both_ends(
      "8",
      [&](std::size_t i) { return nu[i] * nu[i] + std::pow(sig[i] * dsig[i], 2); },
      [&](std::size_t i) { return base[i]; }));

  // 9-11 on the two boundary points.
  const double L = noise.length();
  const double rho_l = set.phi_inverse(fbar.left), rho_r = set.phi_inverse(fbar.right);
  {
    const double flux = (set.theta_nu ? set.theta_nu(rho_r) - set.theta_nu(rho_l) : 0.0);
    r.items.push_back({"9", std::isfinite(flux), std::abs(flux), 0.0, {}});
  }
  {
    const double s = std::pow(set.sigma(rho_l), 2) + std::pow(set.sigma(rho_r), 2);
    r.items.push_back({"10", std::isfinite(s), s, 0.0, {}});
  }
  {
    AssumptionItem item{"11", true, 0.0, 0.0, {}};
    if (fbar.constant()) {
      item.note = "constant boundary data";
    } else {
      const double pl = set.psi_sigma(noise.F1_at(0.0), rho_l);
      const double pr = set.psi_sigma(noise.F1_at(L), rho_r);
      const double s = fbar.left * fbar.left + fbar.right * fbar.right + rho_l * rho_l +
                       rho_r * rho_r + pl * pl + pr * pr;
      item.pass = std::isfinite(s);
      item.constant = s;
    }
    r.items.push_back(item);
  }
  return r;
}

}  // namespace dk
