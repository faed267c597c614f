#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rbflow/io_util.hpp"
#include "rbflow/rng.hpp"
#include "rbflow/traffic.hpp"

namespace rbflow {

struct Provenance {
  std::string kind;    // "csv" or "synthetic"
  std::string detail;  // path or config summary
  std::uint64_t seed = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Dataset {
  std::vector<TrafficObservation> observations;
  Provenance provenance;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// --- ISO-8601 timestamps (UTC, whole seconds) ------------------------------

namespace detail {

// Days between 1970-01-01 and y-m-d in the proleptic Gregorian calendar.
inline std::int64_t days_from_civil(std::int64_t y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

inline int days_in_month(std::int64_t y, unsigned m) {
  static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2) {
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return leap ? 29 : 28;
  }
  return lengths[m - 1];
}

}  // namespace detail

/// Parses "YYYY-MM-DDTHH:MM:SS" with an optional trailing "Z" as UTC.
inline double parse_iso8601(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
  char sep = 0;
  char tail[8] = {0};
  const int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d%7s", &y, &mo, &d, &sep, &h, &mi, &se,
                            tail);
  if (n < 7 || (sep != 'T' && sep != ' ')) {
    throw ParseError("bad ISO-8601 timestamp: " + s);
  }
  if (n == 8 && std::string(tail) != "Z") throw ParseError("bad ISO-8601 timestamp: " + s);
  if (mo < 1 || mo > 12 || d < 1 || d > detail::days_in_month(y, static_cast<unsigned>(mo)) ||
      h < 0 || h > 23 || mi < 0 || mi > 59 || se < 0 || se > 60) {
    throw ParseError("out-of-range ISO-8601 timestamp: " + s);
  }
  const std::int64_t days = detail::days_from_civil(y, mo, d);
  return static_cast<double>(days * 86400 + h * 3600 + mi * 60 + se);
}

inline std::string format_iso8601(double epoch_seconds) {
  const std::int64_t total = static_cast<std::int64_t>(std::llround(epoch_seconds));
  std::int64_t days = total / 86400;
  std::int64_t rem = total % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t y;
  unsigned mo, d;
  detail::civil_from_days(days, y, mo, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), mo, d, static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
  return buf;
}

// --- CSV interchange --------------------------------------------------------

inline constexpr const char* kCsvHeader =
    "timestamp,sensor_id,flow_veh_h,vehicle_count,speed_kmh,density_veh_km,"
    "temp_c,humidity_pct,precip_mm,wind_kmh,event";

enum class LoadMode { Strict, Lenient };

struct LoadResult {
  Dataset dataset;
  std::size_t rows_skipped = 0;
  std::vector<std::string> messages;
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s, const std::string& row_tag,
                           const char* field_name) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(row_tag + ": unparsable " + field_name + " value '" + s + "'");
  }
}

inline TrafficObservation parse_csv_row(const std::vector<std::string>& fields,
                                        const std::string& row_tag) {
  if (fields.size() != 11) {
    throw ParseError(row_tag + ": expected 11 fields, got " + std::to_string(fields.size()));
  }
  TrafficObservation obs;
  obs.timestamp = parse_iso8601(fields[0]);
  obs.sensor_id = fields[1];
  obs.flow = parse_number(fields[2], row_tag, "flow_veh_h");
  obs.vehicle_count = parse_number(fields[3], row_tag, "vehicle_count");
  obs.speed = parse_number(fields[4], row_tag, "speed_kmh");
  if (!fields[5].empty()) obs.density = parse_number(fields[5], row_tag, "density_veh_km");
  obs.temperature = parse_number(fields[6], row_tag, "temp_c");
  obs.humidity = parse_number(fields[7], row_tag, "humidity_pct");
  obs.precipitation = parse_number(fields[8], row_tag, "precip_mm");
  obs.wind_speed = parse_number(fields[9], row_tag, "wind_kmh");
  obs.event = event_from_string(fields[10]);

  auto require = [&row_tag](bool ok, const char* what) {
    if (!ok) throw ParseError(row_tag + ": " + what);
  };
  require(obs.flow >= 0.0, "flow_veh_h must be >= 0");
  require(obs.vehicle_count >= 0.0, "vehicle_count must be >= 0");
  require(obs.speed >= 0.0, "speed_kmh must be >= 0");
  require(!obs.density || *obs.density >= 0.0, "density_veh_km must be >= 0");
  require(obs.humidity >= 0.0 && obs.humidity <= 100.0, "humidity_pct must be in [0,100]");
  return obs;
}

}  // namespace detail

/// Reads the documented CSV schema. Strict mode throws a row-numbered error
/// on the first malformed row; lenient mode skips bad rows and counts them.
inline LoadResult load_csv(const std::string& path, LoadMode mode = LoadMode::Strict) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file, expected header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ParseError(path + ": header does not match schema");

  LoadResult result;
  result.dataset.provenance = {"csv", path, 0};
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string tag = path + " row " + std::to_string(row);
    try {
      result.dataset.observations.push_back(detail::parse_csv_row(detail::split_fields(line), tag));
    } catch (const ParseError& e) {
      if (mode == LoadMode::Strict) throw;
      ++result.rows_skipped;
      result.messages.push_back(e.what());
    }
  }
  return result;
}

inline std::string to_csv(const Dataset& ds) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const TrafficObservation& o : ds.observations) {
    out += format_iso8601(o.timestamp);
    out += ',';
    out += o.sensor_id;
    out += ',';
    out += format_double(o.flow);
    out += ',';
    out += format_double(o.vehicle_count);
    out += ',';
    out += format_double(o.speed);
    out += ',';
    if (o.density) out += format_double(*o.density);
    out += ',';
    out += format_double(o.temperature);
    out += ',';
    out += format_double(o.humidity);
    out += ',';
    out += format_double(o.precipitation);
    out += ',';
    out += format_double(o.wind_speed);
    out += ',';
    out += to_string(o.event);
    out += '\n';
  }
  return out;
}

inline void save_csv(const Dataset& ds, const std::string& path) {
  atomic_write(path, to_csv(ds));
}

// --- Cleaning ----------------------------------------------------------------

enum class OutlierAction { Drop, Winsorize };

struct CleanPolicy {
  OutlierAction outlier_action = OutlierAction::Drop;
  double mad_threshold = 5.0;
};

struct CleanReport {
  std::size_t missing_dropped = 0;
  std::size_t densities_derived = 0;
  std::size_t outliers_dropped = 0;
  std::size_t values_winsorized = 0;
  std::size_t passes = 0;

  std::size_t total_actions() const {
    return missing_dropped + densities_derived + outliers_dropped + values_winsorized;
  }
};

struct CleanResult {
  Dataset dataset;
  CleanReport report;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

using FieldAccessor = double& (*)(TrafficObservation&);

inline const std::vector<FieldAccessor>& numeric_fields() {
  static const std::vector<FieldAccessor> fields = {
      [](TrafficObservation& o) -> double& { return o.flow; },
      [](TrafficObservation& o) -> double& { return o.vehicle_count; },
      [](TrafficObservation& o) -> double& { return o.speed; },
      [](TrafficObservation& o) -> double& { return *o.density; },
      [](TrafficObservation& o) -> double& { return o.temperature; },
      [](TrafficObservation& o) -> double& { return o.humidity; },
      [](TrafficObservation& o) -> double& { return o.precipitation; },
      [](TrafficObservation& o) -> double& { return o.wind_speed; },
  };
  return fields;
}

}  // namespace detail

/// Drops rows whose required values are missing or non-finite (deriving
/// density = flow/speed where possible), sorts by timestamp, then applies
/// the median +- threshold*MAD outlier rule per numeric field. The pass
/// repeats until nothing changes, so clean(clean(ds)) == clean(ds) by
/// construction. Never throws on data content; everything is reported.
inline CleanResult clean(const Dataset& ds, const CleanPolicy& policy = {}) {
  CleanResult result;
  result.dataset.provenance = ds.provenance;
  CleanReport& rep = result.report;

  std::vector<TrafficObservation> rows;
  rows.reserve(ds.observations.size());
  for (TrafficObservation o : ds.observations) {
    if (!o.density) {
      if (o.speed > 0.0) {
        o.density = o.flow / o.speed;
        ++rep.densities_derived;
      } else {
        ++rep.missing_dropped;
        continue;
      }
    }
    const bool finite = std::isfinite(o.timestamp) && std::isfinite(o.flow) &&
                        std::isfinite(o.vehicle_count) && std::isfinite(o.speed) &&
                        std::isfinite(*o.density) && std::isfinite(o.temperature) &&
                        std::isfinite(o.humidity) && std::isfinite(o.precipitation) &&
                        std::isfinite(o.wind_speed);
    if (!finite) {
      ++rep.missing_dropped;
      continue;
    }
    rows.push_back(std::move(o));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const TrafficObservation& a, const TrafficObservation& b) {
                     return a.timestamp < b.timestamp;
                   });

  const std::size_t max_passes = 100;
  for (rep.passes = 0; rep.passes < max_passes && !rows.empty(); ++rep.passes) {
    bool acted = false;
    for (const auto& field : detail::numeric_fields()) {
      std::vector<double> values;
      values.reserve(rows.size());
      for (auto& r : rows) values.push_back(field(r));
      const double med = detail::median_of(values);
      std::vector<double> deviations;
      deviations.reserve(values.size());
      for (double v : values) deviations.push_back(std::fabs(v - med));
      const double mad = detail::median_of(deviations);
      if (mad == 0.0) continue;  // constant-ish field, rule does not apply
      const double lo = med - policy.mad_threshold * mad;
      const double hi = med + policy.mad_threshold * mad;

      if (policy.outlier_action == OutlierAction::Drop) {
        std::vector<TrafficObservation> kept;
        kept.reserve(rows.size());
        for (auto& r : rows) {
          const double v = field(r);
          if (v < lo || v > hi) {
            ++rep.outliers_dropped;
            acted = true;
          } else {
            kept.push_back(std::move(r));
          }
        }
        rows = std::move(kept);
        if (rows.empty()) break;
      } else {
        for (auto& r : rows) {
          double& v = field(r);
          if (v < lo) {
            v = lo;
            ++rep.values_winsorized;
            acted = true;
          } else if (v > hi) {
            v = hi;
            ++rep.values_winsorized;
            acted = true;
          }
        }
      }
    }
    if (!acted) {
      ++rep.passes;
      break;
    }
  }

  result.dataset.observations = std::move(rows);
  return result;
}

// --- Splitting ----------------------------------------------------------------

enum class SplitMode { Chronological, SeededShuffle };

/// Disjoint, exhaustive partition. Chronological keeps order and puts the
/// first floor(n*train) rows in train; shuffle mode permutes with the seed
/// first.
inline std::pair<Dataset, Dataset> split(const Dataset& ds, double train_ratio, double test_ratio,
                                         SplitMode mode, std::uint64_t seed) {
  if (!(train_ratio > 0.0) || !(test_ratio > 0.0) ||
      std::fabs(train_ratio + test_ratio - 1.0) > 1e-9) {
    throw ValueError("split: ratios must be positive and sum to 1");
  }
  if (ds.observations.empty()) throw ValueError("split: empty dataset");

  std::vector<std::size_t> order(ds.observations.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (mode == SplitMode::SeededShuffle) {
    Rng rng = make_rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  const std::size_t n_train =
      static_cast<std::size_t>(std::floor(static_cast<double>(order.size()) * train_ratio));

  std::pair<Dataset, Dataset> out;
  out.first.provenance = ds.provenance;
  out.second.provenance = ds.provenance;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.first : out.second).observations.push_back(ds.observations[order[i]]);
  }
  return out;
}

// --- Synthetic generator -------------------------------------------------------

/// Desk-scale stand-in for a real sensor feed: a daily rush-hour profile with
/// weekly modulation and Gaussian noise, speed anti-correlated with load,
/// density tied to flow and speed through Q = K*V, weather as bounded random
/// walks, and occasional injected events.
struct SynthConfig {
  double duration_days = 2.0;
  double interval_minutes = 5.0;
  double base_flow = 300.0;  // veh/h

  struct RushHour {
    double center_hour;
    double amplitude;
    double width_hours;
  };
  std::vector<RushHour> rush_hours = {{8.0, 900.0, 1.5}, {17.5, 1000.0, 2.0}};

  double weekly_amplitude = 60.0;
  double noise_std = 40.0;
  double event_rate = 0.01;
  double speed_limit = 60.0;  // km/h
  double start_epoch = 1672617600.0;  // 2023-01-02T00:00:00Z, a Monday
  std::string sensor_id = "S1";

  // Bounded random-walk parameters per weather channel.
  double temp_start = 25.0, temp_step = 0.2, temp_min = -5.0, temp_max = 40.0;
  double humidity_start = 60.0, humidity_step = 0.8, humidity_min = 0.0, humidity_max = 100.0;
  double precip_start = 0.0, precip_step = 0.15, precip_min = 0.0, precip_max = 12.0;
  double wind_start = 15.0, wind_step = 0.6, wind_min = 0.0, wind_max = 90.0;
};

inline void validate(const SynthConfig& cfg) {
  if (!(cfg.interval_minutes > 0.0)) throw ValueError("synth config: interval must be > 0");
  if (!(cfg.duration_days > 0.0)) throw ValueError("synth config: duration must be > 0");
  if (cfg.base_flow < 0.0) throw ValueError("synth config: base_flow must be >= 0");
  for (const auto& rh : cfg.rush_hours) {
    if (rh.amplitude < 0.0 || !(rh.width_hours > 0.0)) {
      throw ValueError("synth config: rush hour amplitudes must be >= 0 and widths > 0");
    }
  }
  if (cfg.event_rate < 0.0 || cfg.event_rate > 1.0) {
    throw ValueError("synth config: event_rate must be in [0, 1]");
  }
}

inline Dataset synth_generate(const SynthConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> flow_noise(0.0, cfg.noise_std);
  std::normal_distribution<double> speed_noise(0.0, 1.5);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> event_kind(0, 2);

  double peak_flow = cfg.base_flow + cfg.weekly_amplitude;
  for (const auto& rh : cfg.rush_hours) peak_flow += rh.amplitude;

  auto walk = [&rng](double& value, double step, double lo, double hi) {
    std::normal_distribution<double> d(0.0, step);
    value = std::min(std::max(value + d(rng), lo), hi);
    return value;
  };

  Dataset ds;
  ds.provenance = {"synthetic",
                   std::to_string(cfg.duration_days) + "d@" +
                       std::to_string(cfg.interval_minutes) + "m",
                   seed};
  const std::size_t rows = static_cast<std::size_t>(
      std::llround(cfg.duration_days * 24.0 * 60.0 / cfg.interval_minutes));
  ds.observations.reserve(rows);

  double temp = cfg.temp_start;
  double humidity = cfg.humidity_start;
  double precip = cfg.precip_start;
  double wind = cfg.wind_start;

  for (std::size_t i = 0; i < rows; ++i) {
    TrafficObservation o;
    o.timestamp = cfg.start_epoch + static_cast<double>(i) * cfg.interval_minutes * 60.0;
    o.sensor_id = cfg.sensor_id;

    const double elapsed_days = (o.timestamp - cfg.start_epoch) / 86400.0;
    const double hour = std::fmod(elapsed_days, 1.0) * 24.0 +
                        std::fmod(cfg.start_epoch / 3600.0, 24.0);
    double flow = cfg.base_flow;
    for (const auto& rh : cfg.rush_hours) {
      double dh = std::fabs(std::fmod(hour, 24.0) - rh.center_hour);
      dh = std::min(dh, 24.0 - dh);  // circular distance within the day
      flow += rh.amplitude * std::exp(-dh * dh / (2.0 * rh.width_hours * rh.width_hours));
    }
    flow += cfg.weekly_amplitude * std::sin(2.0 * M_PI * elapsed_days / 7.0);
    flow += flow_noise(rng);

    o.event = EventFlag::None;
    if (uni(rng) < cfg.event_rate) {
      const int kind = event_kind(rng);
      o.event = kind == 0 ? EventFlag::Accident
                          : kind == 1 ? EventFlag::Closure : EventFlag::ScheduledEvent;
    }
    double speed_factor = 1.0;
    if (o.event == EventFlag::Accident || o.event == EventFlag::Closure) {
      flow *= 0.85;
      speed_factor = 0.6;
    } else if (o.event == EventFlag::ScheduledEvent) {
      flow *= 1.15;
    }
    o.flow = std::max(0.0, flow);

    const double utilization = peak_flow > 0.0 ? std::min(1.0, o.flow / peak_flow) : 0.0;
    o.speed = std::max(5.0, cfg.speed_limit * speed_factor * (1.0 - 0.65 * utilization) +
                                speed_noise(rng));
    o.density = o.flow / o.speed;
    o.vehicle_count = o.flow * cfg.interval_minutes / 60.0;

    o.temperature = walk(temp, cfg.temp_step, cfg.temp_min, cfg.temp_max);
    o.humidity = walk(humidity, cfg.humidity_step, cfg.humidity_min, cfg.humidity_max);
    o.precipitation = walk(precip, cfg.precip_step, cfg.precip_min, cfg.precip_max);
    o.wind_speed = walk(wind, cfg.wind_step, cfg.wind_min, cfg.wind_max);

    ds.observations.push_back(std::move(o));
  }
  return ds;
}

}  // namespace rbflow
