#include "eegclip/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "eegclip/error.hpp"

namespace eegclip::ad {

GradCheckResult grad_check(const std::function<Tensor()>& f, Tensor& x, double h,
                           std::optional<std::size_t> max_coords) {
  if (!x.requires_grad()) throw Error(ErrorCode::kInvalidArgument, "grad_check: x must require grad");
  x.zero_grad();
  const Tensor loss = f();
  backward(loss);
  std::vector<double> analytic(x.numel(), 0.0);
  if (x.has_grad()) std::copy(x.grad().begin(), x.grad().end(), analytic.begin());

  const std::size_t n = x.numel();
  const std::size_t count = max_coords ? std::min(*max_coords, n) : n;
  GradCheckResult result;
  auto values = x.mutable_values();
  NoGradGuard guard;
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t i = count == n ? c : c * n / count;
    const double saved = values[i];
    values[i] = saved + h;
    const double up = f().item();
    values[i] = saved - h;
    const double down = f().item();
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(analytic[i] - numeric) / std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
    if (err > result.max_relative_error || result.checked == 0) {
      if (err >= result.max_relative_error) result.worst_index = i;
      result.max_relative_error = std::max(result.max_relative_error, err);
    }
    ++result.checked;
  }
  x.zero_grad();
  return result;
}

}  // namespace eegclip::ad
