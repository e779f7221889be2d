#include "fanet/windows.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "fanet/errors.hpp"
#include "fanet/kv.hpp"

namespace fanet {

SplitRanges chrono_split(std::size_t n_rows, std::size_t min_rows, double train_frac,
                         double val_frac, double test_frac) {
  if (std::fabs(train_frac + val_frac + test_frac - 1.0) > 1e-12) {
    throw ConfigError("split: fractions must sum to 1");
  }
  if (!(train_frac > 0.0) || !(val_frac > 0.0) || !(test_frac > 0.0)) {
    throw ConfigError("split: fractions must be positive");
  }
  const double n = static_cast<double>(n_rows);
  const auto t_end = static_cast<std::size_t>(std::floor(n * train_frac));
  const auto v_end = static_cast<std::size_t>(std::floor(n * (train_frac + val_frac)));

  SplitRanges s;
  s.train = {0, t_end};
  s.val = {t_end, v_end};
  s.test = {v_end, n_rows};

  const struct {
    const char* name;
    const RowRange& r;
  } segs[] = {{"train", s.train}, {"val", s.val}, {"test", s.test}};
  for (const auto& seg : segs) {
    if (seg.r.size() < min_rows) {
      throw DataError("split: " + std::string(seg.name) + " segment has " +
                      std::to_string(seg.r.size()) + " rows, need at least " +
                      std::to_string(min_rows));
    }
  }
  return s;
}

WindowSpec WindowSpec::for_model(const ModelConfig& cfg) {
  WindowSpec w;
  w.lookback = cfg.lookback;
  w.horizon = cfg.horizon;
  if (cfg.n_endo > Dataset::kEndoChannels) {
    throw ConfigError("windows: model wants " + std::to_string(cfg.n_endo) +
                      " endogenous channels, dataset has " +
                      std::to_string(Dataset::kEndoChannels));
  }
  if (cfg.n_exo > Dataset::kExoChannels) {
    throw ConfigError("windows: model wants " + std::to_string(cfg.n_exo) +
                      " exogenous channels, dataset has " +
                      std::to_string(Dataset::kExoChannels));
  }
  for (std::size_t i = 0; i < cfg.n_endo; ++i) w.endo_channels.push_back(i);
  for (std::size_t i = 0; i < cfg.n_exo; ++i) {
    w.exo_channels.push_back(Dataset::kEndoChannels + i);
  }
  return w;
}

void WindowSpec::validate() const {
  if (lookback == 0 || horizon == 0) {
    throw ConfigError("windows: lookback and horizon must be positive");
  }
  if (endo_channels.empty() || exo_channels.empty()) {
    throw ConfigError("windows: need at least one endogenous and one exogenous channel");
  }
  for (std::size_t ch : endo_channels) {
    if (ch >= Dataset::kChannels) throw ConfigError("windows: channel id out of range");
  }
  for (std::size_t ch : exo_channels) {
    if (ch >= Dataset::kChannels) throw ConfigError("windows: channel id out of range");
  }
}

Window WindowSet::materialize(std::size_t i) const {
  const std::size_t start = starts.at(i);
  const std::size_t l = spec.lookback;
  const std::size_t h = spec.horizon;
  const std::size_t f = spec.endo_channels.size();
  const std::size_t c = spec.exo_channels.size();
  const double* d = data->data();

  Window w;
  w.start = start;
  w.x = Tensor::zeros({l, f});
  w.z = Tensor::zeros({l, c});
  w.y = Tensor::zeros({f, h});
  for (std::size_t t = 0; t < l; ++t) {
    const double* row = d + (start + t) * Dataset::kChannels;
    for (std::size_t j = 0; j < f; ++j) w.x.at(t, j) = row[spec.endo_channels[j]];
    for (std::size_t j = 0; j < c; ++j) w.z.at(t, j) = row[spec.exo_channels[j]];
  }
  for (std::size_t t = 0; t < h; ++t) {
    const double* row = d + (start + l + t) * Dataset::kChannels;
    for (std::size_t j = 0; j < f; ++j) w.y.at(j, t) = row[spec.endo_channels[j]];
  }
  return w;
}

WindowSet make_windows(std::shared_ptr<const std::vector<double>> data,
                       std::size_t n_rows, RowRange range, const WindowSpec& spec) {
  spec.validate();
  if (range.end > n_rows || range.begin > range.end) {
    throw DataError("windows: row range outside the dataset");
  }
  const std::size_t need = spec.lookback + spec.horizon;
  if (range.size() < need) {
    throw DataError("windows: segment has " + std::to_string(range.size()) +
                    " rows, need at least " + std::to_string(need));
  }
  WindowSet ws;
  ws.spec = spec;
  ws.data = std::move(data);
  ws.n_rows = n_rows;
  const std::size_t count = range.size() - need + 1;
  ws.starts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ws.starts.push_back(range.begin + i);
  return ws;
}

Normalizer Normalizer::identity() {
  Normalizer n;
  n.mean.fill(0.0);
  n.stdev.fill(1.0);
  return n;
}

Normalizer Normalizer::fit(const Dataset& ds, RowRange rows) {
  if (rows.size() == 0) throw DataError("normalizer: empty training range");
  Normalizer n;
  for (std::size_t c = 0; c < Dataset::kChannels; ++c) {
    double sum = 0.0;
    for (std::size_t i = rows.begin; i < rows.end; ++i) sum += ds.at(i, c);
    const double mean = sum / static_cast<double>(rows.size());
    double var = 0.0;
    for (std::size_t i = rows.begin; i < rows.end; ++i) {
      const double dv = ds.at(i, c) - mean;
      var += dv * dv;
    }
    var /= static_cast<double>(rows.size());
    n.mean[c] = mean;
    n.stdev[c] = std::max(std::sqrt(var), 1e-8);
  }
  return n;
}

namespace {

SplitWindows build_split_windows(const Dataset& ds, const WindowSpec& spec,
                                 const Normalizer& norm) {
  SplitWindows out;
  out.ranges = chrono_split(ds.rows(), spec.lookback + spec.horizon);
  out.norm = norm;

  auto matrix = std::make_shared<std::vector<double>>(ds.channels);
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    for (std::size_t c = 0; c < Dataset::kChannels; ++c) {
      (*matrix)[i * Dataset::kChannels + c] = out.norm.apply(c, ds.at(i, c));
    }
  }
  std::shared_ptr<const std::vector<double>> shared = matrix;
  out.train = make_windows(shared, ds.rows(), out.ranges.train, spec);
  out.val = make_windows(shared, ds.rows(), out.ranges.val, spec);
  out.test = make_windows(shared, ds.rows(), out.ranges.test, spec);
  return out;
}

}  // namespace

SplitWindows prepare_windows(const Dataset& ds, const WindowSpec& spec, bool normalize) {
  spec.validate();
  const SplitRanges ranges = chrono_split(ds.rows(), spec.lookback + spec.horizon);
  const Normalizer norm =
      normalize ? Normalizer::fit(ds, ranges.train) : Normalizer::identity();
  return build_split_windows(ds, spec, norm);
}

SplitWindows prepare_windows_with(const Dataset& ds, const WindowSpec& spec,
                                  const Normalizer& norm) {
  spec.validate();
  return build_split_windows(ds, spec, norm);
}

void save_normalizer(const std::string& path, const Normalizer& norm) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("normalizer: cannot write '" + path + "'");
  const auto& names = Dataset::channel_names();
  for (std::size_t c = 0; c < Dataset::kChannels; ++c) {
    out << "mean." << names[c] << "=" << kv::format_double(norm.mean[c]) << "\n";
    out << "stdev." << names[c] << "=" << kv::format_double(norm.stdev[c]) << "\n";
  }
  if (!out) throw DataError("normalizer: write failed for '" + path + "'");
}

Normalizer load_normalizer(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("normalizer: cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();

  Normalizer norm = Normalizer::identity();
  std::array<bool, Dataset::kChannels> have_mean{}, have_stdev{};
  const auto& names = Dataset::channel_names();
  for (const auto& [key, value] : kv::parse_lines(text.str(), path)) {
    bool matched = false;
    for (std::size_t c = 0; c < Dataset::kChannels; ++c) {
      if (key == std::string("mean.") + names[c]) {
        norm.mean[c] = kv::parse_double(key, value);
        have_mean[c] = matched = true;
      } else if (key == std::string("stdev.") + names[c]) {
        norm.stdev[c] = kv::parse_double(key, value);
        have_stdev[c] = matched = true;
      }
    }
    if (!matched) throw DataError("normalizer: unknown key '" + key + "' in " + path);
  }
  for (std::size_t c = 0; c < Dataset::kChannels; ++c) {
    if (!have_mean[c] || !have_stdev[c]) {
      throw DataError("normalizer: missing statistics for channel '" +
                      std::string(names[c]) + "' in " + path);
    }
    if (!(norm.stdev[c] > 0.0)) {
      throw DataError("normalizer: non-positive deviation for channel '" +
                      std::string(names[c]) + "' in " + path);
    }
  }
  return norm;
}

}  // namespace fanet
