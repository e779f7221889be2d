#pragma once

#include <vector>

#include "fanet/rk2.hpp"
#include "fanet/vec2.hpp"
#include "fanet/wave.hpp"

namespace fanet {

// Box-type floating breakwater restricted to plane motion: surge along x,
// heave along z, pitch about the horizontal axis normal to the plane.
// Displacements are measured from the calm-water equilibrium pose.
struct FloatBody {
  // Geometry and material (per unit flume width).
  double width = 0.5;      // [m]
  double height = 0.2;     // [m]
  double density = 500.0;  // [kg/m^3]
  double rho_w = 1000.0;
  double gravity = 9.81;
  double depth = 0.8;      // water depth [m]
  double x_center = 0.0;   // equilibrium x of the center of mass

  // State.
  double surge = 0.0, heave = 0.0, pitch = 0.0;
  double v_surge = 0.0, v_heave = 0.0, v_pitch = 0.0;

  double draft() const { return density / rho_w * height; }
  double rw() const { return draft() / depth; }
  double mass() const { return density * width * height; }
  double inertia() const { return mass() * (width * width + height * height) / 12.0; }
  // Center-of-mass height at rest, with z = 0 on the calm water line.
  double equilibrium_z() const { return 0.5 * height - draft(); }
  Vec2 center() const { return {x_center + surge, equilibrium_z() + heave}; }

  void validate() const;  // throws ConfigError
};

// Linear hydrodynamic closure. Negative entries mean "derive the default from
// the body geometry": hydrostatic restoring for a rectangular waterplane,
// strip-theory-style added mass, lightly damped defaults, and excitation
// gains that map incident elevation/slope to forces.
struct HydroCoeffs {
  double added_mass_surge = -1.0;
  double added_mass_heave = -1.0;
  double added_inertia_pitch = -1.0;
  double damping_surge = -1.0;
  double damping_heave = -1.0;
  double damping_pitch = -1.0;
  double restore_heave = -1.0;
  double restore_pitch = -1.0;
  double exc_surge = -1.0;
  double exc_heave = -1.0;
  double exc_pitch = -1.0;

  static HydroCoeffs derived(const FloatBody& body);
  // Copy with every negative entry replaced by its derived default.
  HydroCoeffs resolved(const FloatBody& body) const;
  void validate() const;  // requires a fully resolved, non-negative set
};

// Incident-wave sample at the body station.
struct WaveSample {
  double eta = 0.0;
  double slope = 0.0;
};

// External force applied at a body-frame attachment point, frozen across one
// step (explicit coupling with the mooring solver).
struct ExternalPull {
  Vec2 force;
  Vec2 attach_local;
};

// Rigid-body kinematics of an attachment point. Positive pitch rotates the
// body counterclockwise in the x-z plane.
Vec2 attachment_world(const FloatBody& body, Vec2 local);
Vec2 attachment_velocity(const FloatBody& body, Vec2 local);

// One explicit-midpoint step. wave_at(stage_frac) must return the incident
// sample at t + stage_frac * dt; it is called once with 0.0 and once with 0.5.
// Forcing: excitation gains on (eta, slope), minus linear damping, minus
// hydrostatic restoring, plus the frozen external pulls (their torque arms
// follow the stage attitude). Throws NumericError if the state leaves the
// finite range.
template <class WaveFn>
void body_step_wave(FloatBody& body, const HydroCoeffs& hydro,
                    const std::vector<ExternalPull>& pulls, double dt, WaveFn&& wave_at,
                    Rk2Scratch& scratch);

// Convenience wrapper evaluating the wave field from an explicit component
// list at absolute time t (excitation measured at the equilibrium station).
void body_step(FloatBody& body, const HydroCoeffs& hydro,
               const std::vector<WaveComponent>& comps,
               const std::vector<ExternalPull>& pulls, double t, double dt,
               Rk2Scratch& scratch);

// Mechanical energy against the linear restoring terms; used by tests and
// sanity audits.
double body_energy(const FloatBody& body, const HydroCoeffs& hydro);

namespace detail {
void body_step_impl(FloatBody& body, const HydroCoeffs& hydro,
                    const std::vector<ExternalPull>& pulls, double dt,
                    const WaveSample& at_start, const WaveSample& at_mid,
                    Rk2Scratch& scratch);
}

template <class WaveFn>
void body_step_wave(FloatBody& body, const HydroCoeffs& hydro,
                    const std::vector<ExternalPull>& pulls, double dt, WaveFn&& wave_at,
                    Rk2Scratch& scratch) {
  const WaveSample at_start = wave_at(0.0);
  const WaveSample at_mid = wave_at(0.5);
  detail::body_step_impl(body, hydro, pulls, dt, at_start, at_mid, scratch);
}

}  // namespace fanet
