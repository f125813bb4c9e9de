#pragma once

#include "avgtrack/matnum.hpp"

#include <functional>
#include <string>
#include <vector>

namespace avgtrack {

/// Closed-loop rollout: T + 1 states and outputs, T inputs.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  std::vector<Vector> outputs;

  std::size_t steps() const { return inputs.size(); }
};

/// Named static state feedback x -> u.
struct Controller {
  std::string name;
  std::function<Vector(const Vector&)> map;

  Vector operator()(const Vector& x) const { return map(x); }
};

}  // namespace avgtrack
