#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "fanet/body.hpp"
#include "fanet/dataset.hpp"
#include "fanet/mooring.hpp"
#include "fanet/rng.hpp"
#include "fanet/wave.hpp"

namespace fanet {

// Downstream wave field stand-in: the incident spectrum passes the breakwater
// attenuated per component, shifted by a per-gauge delay, with a small
// radiated contribution from the body motion and optional gauge noise.
struct TransmissionModel {
  std::vector<double> kt;          // per spectral component, in (0, 1]
  double gain_surge = 0.0;         // radiated elevation per unit body velocity
  double gain_heave = 0.0;
  double gain_pitch = 0.0;
  std::vector<double> delays;      // per downstream gauge [s]
  double noise_std = 0.0;          // [m]

  void validate() const;  // throws ConfigError
};

// Knobs from which the per-component coefficients are built: a smooth
// low-pass in frequency (long waves transmit more).
struct TransmissionConfig {
  double kt_floor = 0.05;     // high-frequency asymptote of kt, in (0, 1]
  double omega_cut = 4.0;     // [rad/s]
  double kt_exponent = 2.0;   // low-pass rolloff order
  double gain_surge = 0.02;
  double gain_heave = 0.05;
  double gain_pitch = 0.01;
  double delay = 0.0;         // applied to every downstream gauge [s]
  double noise_std = 0.0;

  void validate() const;
};

TransmissionModel make_transmission(const std::vector<WaveComponent>& comps,
                                    const TransmissionConfig& cfg,
                                    std::size_t n_gauges);

// Body velocities recorded at the output sampling rate, linearly interpolated
// (and clamped at the ends) when read back at a delayed time.
struct BodyHistory {
  double dt = 0.05;
  std::vector<double> v_surge, v_heave, v_pitch;

  void push(double vs, double vh, double vp);
  std::array<double, 3> velocity_at(double t) const;
};

// Transmitted elevation at a downstream gauge. Delayed times before the start
// of the record fall back to the earliest history sample. When noise_std > 0
// a seeded generator must be supplied.
double downstream_elevation(const std::vector<WaveComponent>& comps,
                            const BodyHistory& history, const TransmissionModel& tm,
                            std::size_t gauge_index, double x, double t,
                            Rng* noise_rng);

// Gauge stations and mooring anchors relative to the body at x = 0.
struct FlumeLayout {
  std::array<double, 5> upstream_x = {-6.0, -5.0, -4.0, -3.0, -2.0};
  std::array<double, 4> downstream_x = {2.0, 3.0, 4.0, 5.0};
  double anchor_dx = 1.35;  // horizontal run from each fairlead to its anchor

  void validate() const;
};

struct SimConfig {
  double duration = 500.0;  // [s]
  double dt_sample = 0.05;  // output sampling interval [s]
  double dt_sub = 1e-4;     // internal substep [s]

  void validate() const;            // ratios integral within 1e-9
  std::size_t n_samples() const;    // rows emitted = n_samples + 1
  std::size_t substeps_per_sample() const;
};

// Full co-simulation: irregular incident sea, moored two-line breakwater,
// upstream gauges recording the incident field, downstream gauges recording
// the transmitted field. Rows at t = 0, dt, ..., duration. Throws
// NumericError naming the last stable output time if the integration blows up.
Dataset generate_dataset(const WaveCondition& cond, const FloatBody& body,
                         const MooringLineSpec& mooring, const HydroCoeffs& hydro,
                         const TransmissionConfig& transmission,
                         const FlumeLayout& layout, const SimConfig& sim);

}  // namespace fanet
