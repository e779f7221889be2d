#include "fanet/body.hpp"

#include <cmath>
#include <string>

#include "fanet/errors.hpp"

namespace fanet {

void FloatBody::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) {
    throw ConfigError("body: width and height must be positive");
  }
  if (!(density > 0.0) || !(rho_w > 0.0)) {
    throw ConfigError("body: densities must be positive");
  }
  if (!(gravity > 0.0)) throw ConfigError("body: gravity must be positive");
  if (!(depth > 0.0)) throw ConfigError("body: depth must be positive");
  const double r = rw();
  if (!(r > 0.0 && r < 1.0)) {
    throw ConfigError("body: draft/depth ratio must lie in (0, 1), got " + std::to_string(r));
  }
  if (!(mass() > 0.0) || !(inertia() > 0.0)) {
    throw ConfigError("body: mass and inertia must be positive");
  }
}

HydroCoeffs HydroCoeffs::derived(const FloatBody& body) {
  body.validate();
  const double m = body.mass();
  const double draft = body.draft();
  const double rho_g = body.rho_w * body.gravity;

  HydroCoeffs h;
  // Strip-style added mass: half-cylinder of fluid beneath the waterplane for
  // heave, one alongside the wetted side wall for surge.
  h.added_mass_surge = body.rho_w * M_PI / 8.0 * draft * draft;
  h.added_mass_heave = body.rho_w * M_PI / 8.0 * body.width * body.width;
  h.added_inertia_pitch = body.rho_w * M_PI / 128.0 * std::pow(body.width, 4.0);

  // Hydrostatics of the rectangular waterplane.
  h.restore_heave = rho_g * body.width;
  const double volume = body.width * draft;
  const double bm = (body.width * body.width * body.width / 12.0) / volume;
  const double kb = 0.5 * draft;
  const double kg = 0.5 * body.height;
  const double gm = kb + bm - kg;
  if (!(gm > 0.0)) {
    throw ConfigError("body: metacentric height must be positive, got " + std::to_string(gm));
  }
  h.restore_pitch = rho_g * volume * gm;

  // Light radiation damping: a few percent of critical in each DOF.
  const double zeta = 0.08;
  h.damping_heave = 2.0 * zeta * std::sqrt(h.restore_heave * (m + h.added_mass_heave));
  h.damping_pitch =
      2.0 * zeta * std::sqrt(h.restore_pitch * (body.inertia() + h.added_inertia_pitch));
  h.damping_surge = 2.0 * zeta * std::sqrt(h.restore_heave * (m + h.added_mass_surge));

  // Long-wave excitation gains: hydrostatic heave force per unit elevation,
  // Froude-Krylov-style surge force and waterplane pitch moment per unit slope.
  h.exc_heave = h.restore_heave;
  h.exc_surge = rho_g * volume;
  h.exc_pitch = rho_g * (body.width * body.width * body.width / 12.0);
  return h;
}

HydroCoeffs HydroCoeffs::resolved(const FloatBody& body) const {
  const HydroCoeffs def = derived(body);
  HydroCoeffs h = *this;
  auto pick = [](double& field, double fallback) {
    if (field < 0.0) field = fallback;
  };
  pick(h.added_mass_surge, def.added_mass_surge);
  pick(h.added_mass_heave, def.added_mass_heave);
  pick(h.added_inertia_pitch, def.added_inertia_pitch);
  pick(h.damping_surge, def.damping_surge);
  pick(h.damping_heave, def.damping_heave);
  pick(h.damping_pitch, def.damping_pitch);
  pick(h.restore_heave, def.restore_heave);
  pick(h.restore_pitch, def.restore_pitch);
  pick(h.exc_surge, def.exc_surge);
  pick(h.exc_heave, def.exc_heave);
  pick(h.exc_pitch, def.exc_pitch);
  h.validate();
  return h;
}

void HydroCoeffs::validate() const {
  const double fields[] = {added_mass_surge, added_mass_heave, added_inertia_pitch,
                           damping_surge,    damping_heave,    damping_pitch,
                           restore_heave,    restore_pitch,    exc_surge,
                           exc_heave,        exc_pitch};
  for (double f : fields) {
    if (!(f >= 0.0) || !std::isfinite(f)) {
      throw ConfigError("body: hydrodynamic coefficients must be resolved and non-negative");
    }
  }
}

Vec2 attachment_world(const FloatBody& body, Vec2 local) {
  const double c = std::cos(body.pitch);
  const double s = std::sin(body.pitch);
  const Vec2 r0 = body.center();
  return {r0.x + c * local.x - s * local.z, r0.z + s * local.x + c * local.z};
}

Vec2 attachment_velocity(const FloatBody& body, Vec2 local) {
  const double c = std::cos(body.pitch);
  const double s = std::sin(body.pitch);
  const Vec2 offset{c * local.x - s * local.z, s * local.x + c * local.z};
  return {body.v_surge - body.v_pitch * offset.z, body.v_heave + body.v_pitch * offset.x};
}

double body_energy(const FloatBody& body, const HydroCoeffs& hydro) {
  const double m = body.mass();
  const double i = body.inertia();
  return 0.5 * (m + hydro.added_mass_surge) * body.v_surge * body.v_surge +
         0.5 * (m + hydro.added_mass_heave) * body.v_heave * body.v_heave +
         0.5 * (i + hydro.added_inertia_pitch) * body.v_pitch * body.v_pitch +
         0.5 * hydro.restore_heave * body.heave * body.heave +
         0.5 * hydro.restore_pitch * body.pitch * body.pitch;
}

namespace detail {

void body_step_impl(FloatBody& body, const HydroCoeffs& hydro,
                    const std::vector<ExternalPull>& pulls, double dt,
                    const WaveSample& at_start, const WaveSample& at_mid,
                    Rk2Scratch& scratch) {
  if (!(dt > 0.0)) throw ConfigError("body: dt must be positive");
  const double m = body.mass();
  const double inertia = body.inertia();

  std::vector<double> y = {body.surge,   body.heave,   body.pitch,
                           body.v_surge, body.v_heave, body.v_pitch};

  auto deriv = [&](double frac, const std::vector<double>& s, std::vector<double>& ds) {
    const WaveSample& w = (frac == 0.0) ? at_start : at_mid;
    const double pitch = s[2];
    const double cp = std::cos(pitch);
    const double sp = std::sin(pitch);

    double fx = -hydro.exc_surge * w.slope - hydro.damping_surge * s[3];
    double fz = hydro.exc_heave * w.eta - hydro.restore_heave * s[1] -
                hydro.damping_heave * s[4];
    double tq = -hydro.exc_pitch * w.slope - hydro.restore_pitch * pitch -
                hydro.damping_pitch * s[5];

    for (const auto& p : pulls) {
      // Torque arm follows the stage attitude; the pull itself is frozen.
      const Vec2 offset{cp * p.attach_local.x - sp * p.attach_local.z,
                        sp * p.attach_local.x + cp * p.attach_local.z};
      fx += p.force.x;
      fz += p.force.z;
      tq += offset.x * p.force.z - offset.z * p.force.x;
    }

    ds[0] = s[3];
    ds[1] = s[4];
    ds[2] = s[5];
    ds[3] = fx / (m + hydro.added_mass_surge);
    ds[4] = fz / (m + hydro.added_mass_heave);
    ds[5] = tq / (inertia + hydro.added_inertia_pitch);
  };

  rk2_step(y, dt, deriv, scratch);

  for (double v : y) {
    if (!std::isfinite(v)) {
      throw NumericError("body: non-finite state after step with dt=" + std::to_string(dt));
    }
  }
  body.surge = y[0];
  body.heave = y[1];
  body.pitch = y[2];
  body.v_surge = y[3];
  body.v_heave = y[4];
  body.v_pitch = y[5];
}

}  // namespace detail

void body_step(FloatBody& body, const HydroCoeffs& hydro,
               const std::vector<WaveComponent>& comps,
               const std::vector<ExternalPull>& pulls, double t, double dt,
               Rk2Scratch& scratch) {
  const double x = body.x_center;
  const WaveSample at_start{surface_elevation(comps, x, t), surface_slope(comps, x, t)};
  const WaveSample at_mid{surface_elevation(comps, x, t + 0.5 * dt),
                          surface_slope(comps, x, t + 0.5 * dt)};
  detail::body_step_impl(body, hydro, pulls, dt, at_start, at_mid, scratch);
}

}  // namespace fanet
