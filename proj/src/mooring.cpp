#include "fanet/mooring.hpp"

#include <cmath>
#include <string>

#include "fanet/errors.hpp"

namespace fanet {

namespace {

constexpr double kQuarterPi = 0.78539816339744830961;

double node_length_share(const MooringLineSpec& spec, std::size_t i, std::size_t n_nodes) {
  const double l = spec.segment_length();
  return (i == 0 || i + 1 == n_nodes) ? 0.5 * l : l;
}

}  // namespace

MooringLineSpec MooringLineSpec::finalized() const {
  MooringLineSpec s = *this;
  if (!(s.length > 0.0)) throw ConfigError("mooring: length must be positive");
  if (!(s.mass_per_len > 0.0)) throw ConfigError("mooring: mass_per_len must be positive");
  if (s.n_segments < 2) throw ConfigError("mooring: n_segments must be at least 2");
  if (!(s.rho_w > 0.0)) throw ConfigError("mooring: rho_w must be positive");
  if (s.diameter <= 0.0) {
    if (!(s.rho_m > 0.0)) {
      throw ConfigError("mooring: need diameter or rho_m to size the line");
    }
    s.diameter = std::sqrt(s.mass_per_len / (kQuarterPi * s.rho_m));
  } else if (s.rho_m <= 0.0) {
    s.rho_m = s.mass_per_len / (kQuarterPi * s.diameter * s.diameter);
  }
  if (s.elastic_modulus < 0.0 || s.c_int < 0.0 || s.c_dt < 0.0 || s.c_dn < 0.0 ||
      s.c_at < 0.0 || s.c_an < 0.0 || s.k_b < 0.0 || s.c_b < 0.0) {
    throw ConfigError("mooring: physical coefficients must be non-negative");
  }
  if (s.gravity < 0.0) throw ConfigError("mooring: gravity must be non-negative");
  return s;
}

double MooringLineSpec::area() const { return kQuarterPi * diameter * diameter; }

double MooringLineSpec::segment_length() const {
  return length / static_cast<double>(n_segments);
}

double MooringLineSpec::net_weight_z(double len) const {
  return -kQuarterPi * diameter * diameter * len * (rho_m - rho_w) * gravity;
}

MooringState init_line(const MooringLineSpec& spec, Vec2 anchor, Vec2 fairlead) {
  const std::size_t n = spec.n_segments + 1;
  MooringState st;
  st.r.resize(n);
  st.r_dot.assign(n, Vec2{});
  st.anchor_index = 0;
  st.fairlead_index = n - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(n - 1);
    st.r[i] = anchor + (fairlead - anchor) * f;
  }
  return st;
}

void MooringForces::resize(std::size_t n_nodes, std::size_t n_segments) {
  total.assign(n_nodes, Vec2{});
  axial.assign(n_nodes, Vec2{});
  seabed.assign(n_nodes, Vec2{});
  tension.assign(n_segments, 0.0);
  axial_damping.assign(n_segments, 0.0);
  amass_xx.assign(n_nodes, 0.0);
  amass_xz.assign(n_nodes, 0.0);
  amass_zz.assign(n_nodes, 0.0);
}

void mooring_forces(const MooringState& state, const MooringLineSpec& spec,
                    MooringForces& out) {
  const std::size_t n = state.n_nodes();
  if (n < 2) throw ConfigError("mooring: state needs at least 2 nodes");
  const std::size_t ns = n - 1;
  out.resize(n, ns);

  const double l = spec.segment_length();
  const double area = spec.area();
  const double ea = spec.elastic_modulus * area;
  const double ca = spec.c_int * area;

  // Segment pass: clamped elastic tension plus internal axial damping, applied
  // as an action-reaction pair along the current segment direction.
  for (std::size_t i = 0; i < ns; ++i) {
    const Vec2 seg = state.r[i + 1] - state.r[i];
    const double len = seg.norm();
    if (len < 1e-12) {
      throw NumericError("mooring: degenerate geometry, nodes " + std::to_string(i) +
                         " and " + std::to_string(i + 1) + " coincide");
    }
    const Vec2 e = seg * (1.0 / len);
    const double strain = (len - l) / l;
    const double tension = (strain > 0.0) ? ea * strain : 0.0;
    const double strain_rate = e.dot(state.r_dot[i + 1] - state.r_dot[i]) / l;
    const double damping = ca * strain_rate;
    out.tension[i] = tension;
    out.axial_damping[i] = damping;
    const Vec2 f = e * (tension + damping);
    out.axial[i] += f;
    out.axial[i + 1] += -f;
  }

  // Node pass: net weight, quadratic drag split along the local tangent,
  // added-mass matrix, seabed reaction below z_bot.
  for (std::size_t i = 0; i < n; ++i) {
    const double share = node_length_share(spec, i, n);

    Vec2 tangent;
    if (i == 0) {
      tangent = state.r[1] - state.r[0];
    } else if (i + 1 == n) {
      tangent = state.r[n - 1] - state.r[n - 2];
    } else {
      tangent = state.r[i + 1] - state.r[i - 1];
    }
    const double tlen = tangent.norm();
    if (tlen < 1e-12) {
      throw NumericError("mooring: degenerate geometry, tangent undefined at node " +
                         std::to_string(i));
    }
    const Vec2 e = tangent * (1.0 / tlen);

    const Vec2 v = state.r_dot[i];
    const Vec2 vt = e * v.dot(e);
    const Vec2 vn = v - vt;
    const double drag_t = 0.5 * spec.rho_w * spec.c_dt * share * spec.diameter;
    const double drag_n = 0.5 * spec.rho_w * spec.c_dn * share * spec.diameter;
    const Vec2 drag = vt * (-drag_t * vt.norm()) + vn * (-drag_n * vn.norm());

    const double am = spec.rho_w * kQuarterPi * spec.diameter * spec.diameter * share;
    const double dt_an = spec.c_at - spec.c_an;
    out.amass_xx[i] = am * (spec.c_an + dt_an * e.x * e.x);
    out.amass_zz[i] = am * (spec.c_an + dt_an * e.z * e.z);
    out.amass_xz[i] = am * dt_an * e.x * e.z;

    Vec2 seabed{};
    if (state.r[i].z <= spec.z_bot) {
      seabed.z = share * spec.diameter *
                 ((spec.z_bot - state.r[i].z) * spec.k_b - v.z * spec.c_b);
    }
    out.seabed[i] = seabed;

    out.total[i] = Vec2{0.0, spec.net_weight_z(share)} + out.axial[i] + drag + seabed;
  }
}

MooringForces mooring_forces(const MooringState& state, const MooringLineSpec& spec) {
  MooringForces out;
  mooring_forces(state, spec, out);
  return out;
}

void mooring_step(MooringState& state, const MooringLineSpec& spec,
                  const FairleadMotion& fairlead, double dt, MooringWorkspace& ws) {
  if (!(dt > 0.0)) throw ConfigError("mooring: dt must be positive");
  const std::size_t n = state.n_nodes();
  const std::size_t anchor = state.anchor_index;
  const std::size_t lead = state.fairlead_index;
  if (anchor >= n || lead >= n || anchor == lead) {
    throw ConfigError("mooring: invalid anchor/fairlead indices");
  }

  // Flat RK2 state holds only the free nodes: [x, z, vx, vz] each.
  std::size_t n_free = 0;
  ws.y.clear();
  for (std::size_t i = 0; i < n; ++i) {
    if (i == anchor || i == lead) continue;
    ws.y.push_back(state.r[i].x);
    ws.y.push_back(state.r[i].z);
    ws.y.push_back(state.r_dot[i].x);
    ws.y.push_back(state.r_dot[i].z);
    ++n_free;
  }
  (void)n_free;

  ws.stage = state;

  auto deriv = [&](double frac, const std::vector<double>& y, std::vector<double>& dydt) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == anchor || i == lead) continue;
      ws.stage.r[i] = {y[k], y[k + 1]};
      ws.stage.r_dot[i] = {y[k + 2], y[k + 3]};
      k += 4;
    }
    ws.stage.r[anchor] = state.r[anchor];
    ws.stage.r_dot[anchor] = Vec2{};
    ws.stage.r[lead] = fairlead.pos_at(frac);
    ws.stage.r_dot[lead] = fairlead.vel_at(frac);

    mooring_forces(ws.stage, spec, ws.forces);

    k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == anchor || i == lead) continue;
      const double m = spec.mass_per_len * node_length_share(spec, i, n);
      const double mxx = m + ws.forces.amass_xx[i];
      const double mzz = m + ws.forces.amass_zz[i];
      const double mxz = ws.forces.amass_xz[i];
      const double det = mxx * mzz - mxz * mxz;
      const Vec2 f = ws.forces.total[i];
      dydt[k] = y[k + 2];
      dydt[k + 1] = y[k + 3];
      dydt[k + 2] = (mzz * f.x - mxz * f.z) / det;
      dydt[k + 3] = (mxx * f.z - mxz * f.x) / det;
      k += 4;
    }
  };

  rk2_step(ws.y, dt, deriv, ws.rk2);

  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == anchor || i == lead) continue;
    state.r[i] = {ws.y[k], ws.y[k + 1]};
    state.r_dot[i] = {ws.y[k + 2], ws.y[k + 3]};
    k += 4;
  }
  state.r[lead] = fairlead.pos1;
  state.r_dot[lead] = fairlead.vel1;

  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(state.r[i].x) || !std::isfinite(state.r[i].z) ||
        !std::isfinite(state.r_dot[i].x) || !std::isfinite(state.r_dot[i].z)) {
      throw NumericError("mooring: non-finite state at node " + std::to_string(i) +
                         " after step with dt=" + std::to_string(dt));
    }
  }
}

Vec2 fairlead_force(const MooringState& state, const MooringLineSpec& spec,
                    MooringForces& scratch) {
  mooring_forces(state, spec, scratch);
  return scratch.total[state.fairlead_index];
}

}  // namespace fanet
