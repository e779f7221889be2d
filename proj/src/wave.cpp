#include "fanet/wave.hpp"

#include <cmath>
#include <string>

#include "fanet/errors.hpp"
#include "fanet/rng.hpp"

namespace fanet {

void WaveCondition::validate() const {
  if (!(hs > 0.0)) throw ConfigError("wave: hs must be positive");
  if (!(tp > 0.0)) throw ConfigError("wave: tp must be positive");
  if (!(depth > 0.0)) throw ConfigError("wave: depth must be positive");
  if (!(gamma >= 1.0)) throw ConfigError("wave: gamma must be >= 1");
  if (n_components == 0) throw ConfigError("wave: n_components must be positive");
  if (!(freq_lo_factor > 0.0) || !(freq_hi_factor > freq_lo_factor)) {
    throw ConfigError("wave: frequency window must satisfy 0 < lo < hi");
  }
  if (!(gravity > 0.0)) throw ConfigError("wave: gravity must be positive");
}

double solve_dispersion(double omega, double depth, double gravity) {
  if (!(omega > 0.0) || !(depth > 0.0) || !(gravity > 0.0)) {
    throw ConfigError("dispersion: omega, depth, and gravity must be positive");
  }
  const double target = omega * omega;
  auto residual = [&](double k) { return gravity * k * std::tanh(k * depth) - target; };

  // g k tanh(k d) grows monotonically from 0, so bracket then bisect.
  double lo = 0.0;
  double hi = std::max(2.0 * target / gravity, 1e-6);
  int guard = 0;
  while (residual(hi) < 0.0) {
    hi *= 2.0;
    if (++guard > 200) {
      throw NumericError("dispersion: failed to bracket root for omega=" +
                         std::to_string(omega));
    }
  }
  double k = 0.5 * (lo + hi);
  for (int it = 0; it < 500; ++it) {
    const double r = residual(k);
    if (std::fabs(r) < 1e-10) {
      return k;
    }
    if (r < 0.0) {
      lo = k;
    } else {
      hi = k;
    }
    k = 0.5 * (lo + hi);
  }
  throw NumericError("dispersion: residual tolerance not reached for omega=" +
                     std::to_string(omega));
}

namespace {

// Unnormalized JONSWAP spectral shape; the absolute scale cancels when the
// component amplitudes are rescaled to the target variance.
double jonswap_shape(double f, double fp, double gamma) {
  const double sigma = (f <= fp) ? 0.07 : 0.09;
  const double df = (f - fp) / (sigma * fp);
  const double peak_arg = std::exp(-0.5 * df * df);
  const double base = std::pow(f, -5.0) * std::exp(-1.25 * std::pow(fp / f, 4.0));
  return base * std::pow(gamma, peak_arg);
}

}  // namespace

std::vector<WaveComponent> synthesize_components(const WaveCondition& cond) {
  cond.validate();
  const double fp = 1.0 / cond.tp;
  const double f_lo = cond.freq_lo_factor * fp;
  const double f_hi = cond.freq_hi_factor * fp;
  const std::size_t n = cond.n_components;
  const double df = (f_hi - f_lo) / static_cast<double>(n);

  Rng phase_rng = Rng(cond.seed).fork("phase");
  const double two_pi = 2.0 * M_PI;

  std::vector<WaveComponent> comps(n);
  double variance = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = f_lo + (static_cast<double>(i) + 0.5) * df;  // bin centers
    const double a = std::sqrt(2.0 * jonswap_shape(f, fp, cond.gamma) * df);
    comps[i].amplitude = a;
    comps[i].omega = two_pi * f;
    comps[i].wavenumber = solve_dispersion(comps[i].omega, cond.depth, cond.gravity);
    comps[i].phase = phase_rng.uniform(0.0, two_pi);
    variance += 0.5 * a * a;
  }

  // Rescale so sum a^2 / 2 equals m0 = (hs/4)^2 exactly.
  const double m0 = (cond.hs / 4.0) * (cond.hs / 4.0);
  const double scale = std::sqrt(m0 / variance);
  for (auto& c : comps) {
    c.amplitude *= scale;
  }
  return comps;
}

double surface_elevation(const std::vector<WaveComponent>& comps, double x, double t) {
  double eta = 0.0;
  for (const auto& c : comps) {
    eta += c.amplitude * std::cos(c.wavenumber * x - c.omega * t + c.phase);
  }
  return eta;
}

double surface_slope(const std::vector<WaveComponent>& comps, double x, double t) {
  double slope = 0.0;
  for (const auto& c : comps) {
    slope -= c.amplitude * c.wavenumber *
             std::sin(c.wavenumber * x - c.omega * t + c.phase);
  }
  return slope;
}

IncidentWaveProbe::IncidentWaveProbe(const std::vector<WaveComponent>& comps, double x,
                                     double time_increment, std::size_t resync_interval)
    : comps_(comps),
      x_(x),
      increment_(time_increment),
      resync_interval_(resync_interval == 0 ? 1 : resync_interval) {
  const std::size_t n = comps_.size();
  cos_phase_.resize(n);
  sin_phase_.resize(n);
  rot_cos_.resize(n);
  rot_sin_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = comps_[i].omega * increment_;
    rot_cos_[i] = std::cos(d);
    rot_sin_[i] = std::sin(d);
  }
  resync();
}

void IncidentWaveProbe::resync() {
  const double t = time();
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    const double theta = comps_[i].wavenumber * x_ - comps_[i].omega * t + comps_[i].phase;
    cos_phase_[i] = std::cos(theta);
    sin_phase_[i] = std::sin(theta);
  }
  since_resync_ = 0;
}

void IncidentWaveProbe::advance() {
  ++ticks_;
  if (++since_resync_ >= resync_interval_) {
    resync();
    return;
  }
  // theta -> theta - omega * increment via one phasor rotation per component.
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    const double c = cos_phase_[i];
    const double s = sin_phase_[i];
    cos_phase_[i] = c * rot_cos_[i] + s * rot_sin_[i];
    sin_phase_[i] = s * rot_cos_[i] - c * rot_sin_[i];
  }
}

double IncidentWaveProbe::elevation() const {
  double eta = 0.0;
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    eta += comps_[i].amplitude * cos_phase_[i];
  }
  return eta;
}

double IncidentWaveProbe::slope() const {
  double slope = 0.0;
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    slope -= comps_[i].amplitude * comps_[i].wavenumber * sin_phase_[i];
  }
  return slope;
}

}  // namespace fanet
