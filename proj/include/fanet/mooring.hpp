#pragma once

#include <cstddef>
#include <vector>

#include "fanet/rk2.hpp"
#include "fanet/vec2.hpp"

namespace fanet {

// Lumped-mass mooring line: n_segments elastic segments joining n_segments+1
// nodes, node 0 anchored, the last node driven by the floating body.
struct MooringLineSpec {
  double length = 1.58;          // unstretched line length [m]
  double mass_per_len = 0.06;    // dry mass per unit length [kg/m]
  double diameter = 0.0;         // [m]; <= 0 derives it from rho_m
  double rho_m = 7850.0;         // line material density [kg/m^3]; <= 0 derives from diameter
  double elastic_modulus = 1e9;  // [Pa]
  double c_int = 2e5;            // internal (axial) damping [Pa s]
  double c_dt = 0.1;             // tangential drag coefficient
  double c_dn = 1.6;             // normal drag coefficient
  double c_at = 0.1;             // tangential added-mass coefficient
  double c_an = 1.0;             // normal added-mass coefficient
  double k_b = 3e6;              // seabed stiffness per contact area [Pa/m]
  double c_b = 1e4;              // seabed damping per contact area [Pa s/m]
  double z_bot = -0.8;           // seabed elevation [m]
  std::size_t n_segments = 20;
  double rho_w = 1000.0;         // water density [kg/m^3]
  double gravity = 9.81;         // [m/s^2]; config-exposed so statics can be switched off

  // Returns a copy with diameter/rho_m mutually resolved and all invariants
  // checked. When both are given explicitly they are accepted as independent
  // knobs: mass_per_len drives inertia, rho_m and diameter drive net weight.
  MooringLineSpec finalized() const;

  double area() const;             // cross-section [m^2]
  double segment_length() const;   // rest length l [m]
  // Net (submerged) weight of a piece of line of length len, signed z-force;
  // negative when the line is denser than water.
  double net_weight_z(double len) const;
};

struct MooringState {
  std::vector<Vec2> r;      // node positions, size n_segments + 1
  std::vector<Vec2> r_dot;  // node velocities
  std::size_t anchor_index = 0;
  std::size_t fairlead_index = 0;

  std::size_t n_nodes() const { return r.size(); }
};

// Straight-line initial layout from anchor to fairlead, at rest.
MooringState init_line(const MooringLineSpec& spec, Vec2 anchor, Vec2 fairlead);

// Per-node force assembly and diagnostics for one evaluation of the line.
struct MooringForces {
  std::vector<Vec2> total;       // weight + axial + drag + seabed per node
  std::vector<Vec2> axial;       // internal tension + axial damping per node
  std::vector<Vec2> seabed;      // seabed reaction per node
  std::vector<double> tension;   // per segment, clamped at zero
  std::vector<double> axial_damping;  // per segment, signed
  // Symmetric 2x2 hydrodynamic added-mass matrix per node.
  std::vector<double> amass_xx, amass_xz, amass_zz;

  void resize(std::size_t n_nodes, std::size_t n_segments);
};

// Assembles gravity/buoyancy, clamped elastic tension, internal axial
// damping, quadratic tangential/normal drag against still water, added-mass
// matrices, and seabed reactions active only at or below z_bot.
// Throws NumericError when adjacent nodes coincide (tangent undefined).
void mooring_forces(const MooringState& state, const MooringLineSpec& spec,
                    MooringForces& out);
MooringForces mooring_forces(const MooringState& state, const MooringLineSpec& spec);

// Prescribed fairlead trajectory across one step; linear interpolation in the
// stage fraction is second-order consistent with the midpoint stepper.
struct FairleadMotion {
  Vec2 pos0, vel0;  // at step start
  Vec2 pos1, vel1;  // at step end

  Vec2 pos_at(double frac) const { return pos0 + (pos1 - pos0) * frac; }
  Vec2 vel_at(double frac) const { return vel0 + (vel1 - vel0) * frac; }
  static FairleadMotion fixed(Vec2 p) { return {p, {}, p, {}}; }
};

struct MooringWorkspace {
  std::vector<double> y;
  MooringState stage;
  MooringForces forces;
  Rk2Scratch rk2;
};

// One explicit-midpoint step of size dt: interior nodes integrate
// (m I + a) r_ddot = F with a per-node 2x2 solve; the anchor stays pinned and
// the fairlead follows the prescribed motion. Throws NumericError naming the
// first non-finite node if the step blows up.
void mooring_step(MooringState& state, const MooringLineSpec& spec,
                  const FairleadMotion& fairlead, double dt, MooringWorkspace& ws);

// Force the line currently applies to the body at the fairlead node.
Vec2 fairlead_force(const MooringState& state, const MooringLineSpec& spec,
                    MooringForces& scratch);

}  // namespace fanet
