#pragma once

#include <span>
#include <string>
#include <vector>

#include "dk/coefficients.hpp"
#include "dk/domain.hpp"
#include "dk/noise.hpp"

namespace dk {

// One checked inequality. `constant` is the smallest constant that makes the
// inequality hold on the sample grid (or the largest, for lower bounds);
// `witness` is the sample point attaining it or breaking the item.
struct AssumptionItem {
  std::string id;
  bool pass = true;
  double constant = 0.0;
  double witness = 0.0;
  std::string note;
};

struct AssumptionReport {
  std::string name;
  std::vector<AssumptionItem> items;

  bool all_pass() const;
  const AssumptionItem& item(const std::string& id) const;
};

/// `per_decade` log-uniform points on [lo, hi].
std::vector<double> log_grid(double lo, double hi, int per_decade = 10);

/// Items 2-5 of the uniqueness list on a log-uniform grid of (0, xi_max].
AssumptionReport validate_uniqueness_assumptions(const CoefficientSet& set,
                                                 std::span<const double> xi_grid);

/// Items 1-11 of the existence list; items 9-11 use the two boundary points.
AssumptionReport validate_existence_assumptions(const CoefficientSet& set, const NoiseModel& noise,
                                                const BoundaryData& fbar,
                                                std::span<const double> xi_grid);

}  // namespace dk
