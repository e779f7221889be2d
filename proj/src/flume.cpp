#include "fanet/flume.hpp"

#include <cmath>
#include <string>

#include "fanet/errors.hpp"

namespace fanet {

void TransmissionModel::validate() const {
  if (kt.empty()) throw ConfigError("transmission: empty kt list");
  for (double k : kt) {
    if (!(k > 0.0 && k <= 1.0)) {
      throw ConfigError("transmission: kt must lie in (0, 1], got " + std::to_string(k));
    }
  }
  for (double d : delays) {
    if (!(d >= 0.0)) throw ConfigError("transmission: delays must be non-negative");
  }
  if (!(noise_std >= 0.0)) throw ConfigError("transmission: noise_std must be non-negative");
}

void TransmissionConfig::validate() const {
  if (!(kt_floor > 0.0 && kt_floor <= 1.0)) {
    throw ConfigError("transmission: kt_floor must lie in (0, 1]");
  }
  if (!(omega_cut > 0.0)) throw ConfigError("transmission: omega_cut must be positive");
  if (!(kt_exponent >= 0.0)) throw ConfigError("transmission: kt_exponent must be non-negative");
  if (!(delay >= 0.0)) throw ConfigError("transmission: delay must be non-negative");
  if (!(noise_std >= 0.0)) throw ConfigError("transmission: noise_std must be non-negative");
}

TransmissionModel make_transmission(const std::vector<WaveComponent>& comps,
                                    const TransmissionConfig& cfg,
                                    std::size_t n_gauges) {
  cfg.validate();
  TransmissionModel tm;
  tm.kt.reserve(comps.size());
  for (const auto& c : comps) {
    const double rolloff = 1.0 / (1.0 + std::pow(c.omega / cfg.omega_cut, cfg.kt_exponent));
    tm.kt.push_back(cfg.kt_floor + (1.0 - cfg.kt_floor) * rolloff);
  }
  tm.gain_surge = cfg.gain_surge;
  tm.gain_heave = cfg.gain_heave;
  tm.gain_pitch = cfg.gain_pitch;
  tm.delays.assign(n_gauges, cfg.delay);
  tm.noise_std = cfg.noise_std;
  tm.validate();
  return tm;
}

void BodyHistory::push(double vs, double vh, double vp) {
  v_surge.push_back(vs);
  v_heave.push_back(vh);
  v_pitch.push_back(vp);
}

std::array<double, 3> BodyHistory::velocity_at(double t) const {
  if (v_surge.empty()) return {0.0, 0.0, 0.0};
  const double pos = t / dt;
  if (pos <= 0.0) return {v_surge.front(), v_heave.front(), v_pitch.front()};
  const std::size_t last = v_surge.size() - 1;
  if (pos >= static_cast<double>(last)) {
    return {v_surge[last], v_heave[last], v_pitch[last]};
  }
  const std::size_t i = static_cast<std::size_t>(pos);
  const double w = pos - static_cast<double>(i);
  auto lerp = [&](const std::vector<double>& v) { return v[i] + (v[i + 1] - v[i]) * w; };
  return {lerp(v_surge), lerp(v_heave), lerp(v_pitch)};
}

double downstream_elevation(const std::vector<WaveComponent>& comps,
                            const BodyHistory& history, const TransmissionModel& tm,
                            std::size_t gauge_index, double x, double t,
                            Rng* noise_rng) {
  if (tm.kt.size() != comps.size()) {
    throw ConfigError("transmission: kt count does not match component count");
  }
  if (gauge_index >= tm.delays.size()) {
    throw ConfigError("transmission: gauge index " + std::to_string(gauge_index) +
                      " out of range");
  }
  const double delayed_t = t - tm.delays[gauge_index];
  double eta = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto& c = comps[i];
    eta += tm.kt[i] * c.amplitude *
           std::cos(c.wavenumber * x - c.omega * delayed_t + c.phase);
  }
  const auto vel = history.velocity_at(std::max(delayed_t, 0.0));
  eta += tm.gain_surge * vel[0] + tm.gain_heave * vel[1] + tm.gain_pitch * vel[2];
  if (tm.noise_std > 0.0) {
    if (noise_rng == nullptr) {
      throw ConfigError("transmission: noise_std > 0 requires a noise generator");
    }
    eta += tm.noise_std * noise_rng->normal();
  }
  return eta;
}

void FlumeLayout::validate() const {
  for (double x : upstream_x) {
    if (!(x < 0.0)) throw ConfigError("layout: upstream gauges must sit at x < 0");
  }
  for (double x : downstream_x) {
    if (!(x > 0.0)) throw ConfigError("layout: downstream gauges must sit at x > 0");
  }
  if (!(anchor_dx > 0.0)) throw ConfigError("layout: anchor_dx must be positive");
}

void SimConfig::validate() const {
  if (!(duration > 0.0) || !(dt_sample > 0.0) || !(dt_sub > 0.0)) {
    throw ConfigError("sim: duration and time steps must be positive");
  }
  const double n = duration / dt_sample;
  if (std::fabs(n - std::round(n)) > 1e-9) {
    throw ConfigError("sim: duration must be an integral multiple of dt_sample");
  }
  const double m = dt_sample / dt_sub;
  if (std::fabs(m - std::round(m)) > 1e-9) {
    throw ConfigError("sim: dt_sample must be an integral multiple of dt_sub");
  }
}

std::size_t SimConfig::n_samples() const {
  return static_cast<std::size_t>(std::llround(duration / dt_sample));
}

std::size_t SimConfig::substeps_per_sample() const {
  return static_cast<std::size_t>(std::llround(dt_sample / dt_sub));
}

namespace {

struct MooredLine {
  MooringLineSpec spec;
  Vec2 attach_local;
  MooringState state;
  MooringWorkspace ws;
};

}  // namespace

Dataset generate_dataset(const WaveCondition& cond, const FloatBody& body_init,
                         const MooringLineSpec& mooring, const HydroCoeffs& hydro_in,
                         const TransmissionConfig& transmission,
                         const FlumeLayout& layout, const SimConfig& sim) {
  cond.validate();
  body_init.validate();
  layout.validate();
  sim.validate();

  const auto comps = synthesize_components(cond);
  const HydroCoeffs hydro = hydro_in.resolved(body_init);
  const TransmissionModel tm =
      make_transmission(comps, transmission, layout.downstream_x.size());
  const MooringLineSpec spec = mooring.finalized();

  FloatBody body = body_init;
  body.surge = body.heave = body.pitch = 0.0;
  body.v_surge = body.v_heave = body.v_pitch = 0.0;

  // Two lines off the bottom corners: seaward anchor upstream, leeward anchor
  // downstream.
  std::vector<MooredLine> lines;
  {
    const Vec2 locals[2] = {{-0.5 * body.width, -0.5 * body.height},
                            {0.5 * body.width, -0.5 * body.height}};
    const double dirs[2] = {-1.0, 1.0};
    for (int i = 0; i < 2; ++i) {
      MooredLine line;
      line.spec = spec;
      line.attach_local = locals[i];
      const Vec2 fair = attachment_world(body, line.attach_local);
      const Vec2 anchor{fair.x + dirs[i] * layout.anchor_dx, spec.z_bot};
      line.state = init_line(spec, anchor, fair);
      lines.push_back(std::move(line));
    }
  }

  Rng noise_rng = Rng(cond.seed).fork("gauge-noise");
  const std::size_t n_samples = sim.n_samples();
  const std::size_t n_sub = sim.substeps_per_sample();

  Dataset ds;
  ds.name = "flume";
  ds.times.reserve(n_samples + 1);
  ds.channels.reserve((n_samples + 1) * Dataset::kChannels);

  BodyHistory history;
  history.dt = sim.dt_sample;

  auto emit_row = [&](double t) {
    history.push(body.v_surge, body.v_heave, body.v_pitch);
    ds.times.push_back(t);
    for (double x : layout.upstream_x) {
      ds.channels.push_back(surface_elevation(comps, x, t));
    }
    for (std::size_t g = 0; g < layout.downstream_x.size(); ++g) {
      ds.channels.push_back(downstream_elevation(comps, history, tm, g,
                                                 layout.downstream_x[g], t, &noise_rng));
    }
    ds.channels.push_back(body.surge);
    ds.channels.push_back(body.heave);
    ds.channels.push_back(body.pitch);
  };

  emit_row(0.0);

  // The body forcing probe advances by half a substep per tick; it sits at the
  // current substep start on entry to each body step.
  IncidentWaveProbe probe(comps, body.x_center, 0.5 * sim.dt_sub);
  Rk2Scratch body_scratch;
  std::vector<ExternalPull> pulls(lines.size());

  double last_stable = 0.0;
  for (std::size_t s = 1; s <= n_samples; ++s) {
    try {
      for (std::size_t sub = 0; sub < n_sub; ++sub) {
        // Freeze the line pulls at the substep start.
        for (std::size_t j = 0; j < lines.size(); ++j) {
          pulls[j].force = fairlead_force(lines[j].state, lines[j].spec, lines[j].ws.forces);
          pulls[j].attach_local = lines[j].attach_local;
        }

        const FloatBody before = body;
        auto wave_at = [&](double frac) {
          if (frac != 0.0) probe.advance();
          return WaveSample{probe.elevation(), probe.slope()};
        };
        body_step_wave(body, hydro, pulls, sim.dt_sub, wave_at, body_scratch);
        probe.advance();  // now at the next substep start

        for (auto& line : lines) {
          FairleadMotion motion;
          motion.pos0 = attachment_world(before, line.attach_local);
          motion.vel0 = attachment_velocity(before, line.attach_local);
          motion.pos1 = attachment_world(body, line.attach_local);
          motion.vel1 = attachment_velocity(body, line.attach_local);
          mooring_step(line.state, line.spec, motion, sim.dt_sub, line.ws);
        }
      }
    } catch (const NumericError& e) {
      throw NumericError("flume: instability before t=" +
                         std::to_string(static_cast<double>(s) * sim.dt_sample) +
                         " (last stable output at t=" + std::to_string(last_stable) +
                         "): " + e.what());
    }
    const double t = static_cast<double>(s) * sim.dt_sample;
    emit_row(t);
    last_stable = t;
  }

  ds.validate();
  return ds;
}

}  // namespace fanet
