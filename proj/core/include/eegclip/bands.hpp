#pragma once

#include <string>
#include <vector>

namespace eegclip {

struct Band {
  std::string name;
  double low_hz = 0.0;
  double high_hz = 0.0;

  double width() const { return high_hz - low_hz; }
  bool operator==(const Band&) const = default;
};

/// delta, theta, alpha, beta, gamma1, gamma2.
inline std::vector<Band> default_bands() {
  return {{"delta", 1.0, 4.0},   {"theta", 4.0, 8.0},   {"alpha", 8.0, 14.0},
          {"beta", 14.0, 31.0},  {"gamma1", 31.0, 51.0}, {"gamma2", 51.0, 75.0}};
}

}  // namespace eegclip
