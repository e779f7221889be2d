#pragma once

#include <cstddef>
#include <vector>

namespace fanet {

// Scratch buffers shared across steps so the inner loop never allocates.
struct Rk2Scratch {
  std::vector<double> slope;
  std::vector<double> midpoint;
  void resize(std::size_t n) {
    slope.resize(n);
    midpoint.resize(n);
  }
};

// One explicit-midpoint step of size dt on the flat state vector y.
//
// deriv(stage_frac, state, dstate) must fill dstate with the time derivative
// at t + stage_frac * dt; it is called exactly twice per step, first with
// stage_frac 0.0 on y, then with stage_frac 0.5 on the midpoint estimate.
// Passing the stage fraction instead of an absolute time lets callers bind
// prescribed boundary motion (wave phase, fairlead position) to the exact
// stage instants without re-deriving them from floating-point time sums.
template <class Deriv>
void rk2_step(std::vector<double>& y, double dt, Deriv&& deriv, Rk2Scratch& scratch) {
  const std::size_t n = y.size();
  scratch.resize(n);
  deriv(0.0, y, scratch.slope);
  for (std::size_t i = 0; i < n; ++i) {
    scratch.midpoint[i] = y[i] + 0.5 * dt * scratch.slope[i];
  }
  deriv(0.5, scratch.midpoint, scratch.slope);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += dt * scratch.slope[i];
  }
}

}  // namespace fanet
