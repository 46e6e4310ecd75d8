#pragma once

#include <cstddef>
#include <functional>

namespace bgq {

struct Maximum {
  double argmax = 0.0;
  double value = 0.0;
};

// Golden-section search for the maximum of a unimodal f on [lo, hi]; stops
// once the bracket is narrower than tol.
Maximum golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                           double tol = 1e-12);

// Evaluates f on `scan_points` interior points of (lo, hi), rejects the
// objective if the scan has an interior local minimum (std::runtime_error),
// then refines the best scan point with golden_section_max on the bracket
// formed by its neighbours.
Maximum maximize_unimodal(const std::function<double(double)>& f, double lo, double hi,
                          std::size_t scan_points = 1000, double tol = 1e-12);

}  // namespace bgq
