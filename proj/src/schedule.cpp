#include "lggm/schedule.hpp"

#include <cmath>
#include <string>

namespace lggm {

void NoiseSchedule::validate() const {
  if (levels.empty()) throw InvalidArgument("noise schedule needs at least one level");
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (!(levels[l] > 0.0) || !std::isfinite(levels[l]))
      throw InvalidArgument("noise levels must be positive and finite");
    if (l > 0 && !(levels[l] < levels[l - 1]))
      throw InvalidArgument("noise levels must be strictly decreasing");
  }
  if (steps_per_level < 1) throw InvalidArgument("steps_per_level must be >= 1");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
}

double NoiseSchedule::step_size(std::size_t level) const {
  const double last = levels.back();
  return epsilon * levels.at(level) * levels.at(level) / (last * last);
}

NoiseSchedule NoiseSchedule::linear(double first, double last, int count, int steps_per_level,
                                    double epsilon) {
  if (count < 1) throw InvalidArgument("noise schedule needs at least one level");
  NoiseSchedule out;
  out.levels.resize(static_cast<std::size_t>(count));
  for (int l = 0; l < count; ++l)
    out.levels[static_cast<std::size_t>(l)] =
        count == 1 ? first : first + (last - first) * double(l) / double(count - 1);
  out.steps_per_level = steps_per_level;
  out.epsilon = epsilon;
  out.validate();
  return out;
}

NoiseSchedule default_schedule() { return NoiseSchedule::linear(0.5, 0.03, 10, 300, 1e-6); }

}  // namespace lggm
