#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fanet {

// Irregular sea state to synthesize: JONSWAP spectrum in finite depth.
struct WaveCondition {
  double hs = 0.18;            // significant wave height [m]
  double tp = 2.0;             // peak period [s]
  double depth = 0.8;          // water depth [m]
  double gamma = 3.3;          // peak-enhancement factor
  std::size_t n_components = 200;
  std::uint64_t seed = 1;      // phase seed
  double gravity = 9.81;
  // Frequency grid spans [freq_lo_factor, freq_hi_factor] / tp.
  double freq_lo_factor = 0.5;
  double freq_hi_factor = 3.0;

  void validate() const;  // throws ConfigError
};

struct WaveComponent {
  double amplitude;    // [m]
  double omega;        // angular frequency [rad/s]
  double wavenumber;   // [rad/m]
  double phase;        // [rad]
};

// Positive root k of omega^2 = g k tanh(k depth), found by bisection until
// the residual |omega^2 - g k tanh(k depth)| drops below 1e-10.
double solve_dispersion(double omega, double depth, double gravity);

// Deterministic component set: amplitudes follow the JONSWAP shape on a
// uniform frequency grid and are rescaled so the variance sum a_i^2 / 2
// equals (hs/4)^2 exactly; phases are uniform in [0, 2pi) from the seed.
std::vector<WaveComponent> synthesize_components(const WaveCondition& cond);

// Free-surface elevation eta(x, t) = sum a cos(k x - omega t + phi) and its
// spatial slope d(eta)/dx.
double surface_elevation(const std::vector<WaveComponent>& comps, double x, double t);
double surface_slope(const std::vector<WaveComponent>& comps, double x, double t);

// Incremental elevation/slope evaluator for a fixed probe position: keeps one
// phasor per component and rotates it by a fixed time increment, recomputing
// the exact trig every resync_interval advances to stop drift accumulating
// over millions of substeps.
class IncidentWaveProbe {
 public:
  IncidentWaveProbe(const std::vector<WaveComponent>& comps, double x,
                    double time_increment, std::size_t resync_interval = 8192);

  void advance();             // move forward by one time increment
  double elevation() const;
  double slope() const;
  double time() const { return static_cast<double>(ticks_) * increment_; }

 private:
  void resync();

  std::vector<WaveComponent> comps_;
  double x_;
  double increment_;
  std::size_t resync_interval_;
  std::uint64_t ticks_ = 0;
  std::uint64_t since_resync_ = 0;
  std::vector<double> cos_phase_, sin_phase_;  // current phase state
  std::vector<double> rot_cos_, rot_sin_;      // per-advance rotation
};

}  // namespace fanet
