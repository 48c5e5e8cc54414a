#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "eegclip/autodiff/tensor.hpp"

namespace eegclip::ad {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

/// Compares the analytic gradient of scalar f at leaf x with central
/// differences. Error per coordinate is |a - n| / max(1e-8, |a| + |n|).
/// With max_coords set, an evenly spaced subset of coordinates is checked.
GradCheckResult grad_check(const std::function<Tensor()>& f, Tensor& x, double h = 1e-5,
                           std::optional<std::size_t> max_coords = std::nullopt);

}  // namespace eegclip::ad
