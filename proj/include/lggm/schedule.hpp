#ifndef LGGM_SCHEDULE_HPP
#define LGGM_SCHEDULE_HPP

#include "lggm/common.hpp"

#include <vector>

namespace lggm {

/// Decreasing noise levels sigma_1 > ... > sigma_L > 0, with `steps_per_level`
/// Langevin steps at each level and base step size `epsilon`.
struct NoiseSchedule {
  std::vector<double> levels;
  int steps_per_level = 0;
  double epsilon = 0.0;

  /// Throws InvalidArgument unless levels are strictly decreasing and positive,
  /// steps_per_level >= 1 and epsilon > 0.
  void validate() const;

  /// alpha_l = epsilon * sigma_l^2 / sigma_L^2.
  double step_size(std::size_t level) const;

  /// `count` levels evenly spaced from `first` down to `last`.
  static NoiseSchedule linear(double first, double last, int count, int steps_per_level,
                              double epsilon);
};

/// Ten levels from 0.5 down to 0.03, 300 steps per level, epsilon = 1e-6.
NoiseSchedule default_schedule();

}  // namespace lggm

#endif  // LGGM_SCHEDULE_HPP
