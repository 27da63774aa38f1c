#pragma once

#include <string>

#include "fhr/geometry.hpp"

namespace fhr {

// Reference causal smoothers the stabilizer is compared against.
struct BaselineKind {
  enum class Type { kMovingAverage, kFirstOrder, kSecondOrder, kConstantSpeed };

  Type type = Type::kMovingAverage;
  int window = 5;      // moving average
  double alpha = 0.5;  // smoothing / blend coefficient for the other kinds
};

// Parses "kind[:param]", e.g. "moving_average:5", "first_order:0.3",
// "second_order", "constant_speed:0.7". The parameter is the window for the
// moving average and the coefficient otherwise.
BaselineKind parse_baseline(const std::string& text);

std::string to_string(const BaselineKind& kind);

// Causal per-sequence smoothing; output length equals input length.
TrajectorySequence apply_baseline(const BaselineKind& kind, const TrajectorySequence& z_seq);

}  // namespace fhr
