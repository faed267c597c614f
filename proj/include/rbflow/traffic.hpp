#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "rbflow/error.hpp"
#include "rbflow/linalg.hpp"

namespace rbflow {

enum class EventFlag { None, Accident, Closure, ScheduledEvent };

inline const char* to_string(EventFlag e) {
  switch (e) {
    case EventFlag::None: return "none";
    case EventFlag::Accident: return "accident";
    case EventFlag::Closure: return "closure";
    case EventFlag::ScheduledEvent: return "scheduled_event";
  }
  return "none";
}

inline EventFlag event_from_string(const std::string& s) {
  if (s == "none") return EventFlag::None;
  if (s == "accident") return EventFlag::Accident;
  if (s == "closure") return EventFlag::Closure;
  if (s == "scheduled_event") return EventFlag::ScheduledEvent;
  throw ParseError("unknown event flag: " + s);
}

/// One timestamped sensor observation. density may be absent in raw data and
/// derived later as flow/speed.
struct TrafficObservation {
  double timestamp = 0.0;  // seconds since epoch, UTC
  std::string sensor_id;
  double flow = 0.0;           // Q, vehicles/hour
  double vehicle_count = 0.0;  // vehicles per interval
  double speed = 0.0;          // V, km/h
  std::optional<double> density;  // K, vehicles/km
  double temperature = 0.0;       // degrees C
  double humidity = 0.0;          // percent
  double precipitation = 0.0;     // mm per interval
  double wind_speed = 0.0;        // km/h
  EventFlag event = EventFlag::None;

  friend bool operator==(const TrafficObservation&, const TrafficObservation&) = default;
};

/// Reference densities anchoring the congestion index: free-flow at the low
/// end, fully congested at the high end.
struct DensityProfile {
  double free_flow_density = 20.0;
  double congested_density = 80.0;
};

inline void validate(const DensityProfile& p) {
  if (!(p.free_flow_density >= 0.0) || !(p.free_flow_density < p.congested_density)) {
    throw ValueError("density profile: need 0 <= free_flow < congested");
  }
}

enum class CongestionBand { Free, Moderate, Congested };

inline const char* to_string(CongestionBand b) {
  switch (b) {
    case CongestionBand::Free: return "free";
    case CongestionBand::Moderate: return "moderate";
    case CongestionBand::Congested: return "congested";
  }
  return "free";
}

struct CongestionLevel {
  CongestionBand band = CongestionBand::Free;
  double tdr = 0.0;  // raw (unclamped) density ratio behind the band
};

struct CongestionThresholds {
  double low = 0.3;
  double high = 0.7;
};

/// Flow identity Q = K * V.
inline double traffic_flow(double density, double speed) {
  if (density < 0.0) throw ValueError("traffic_flow: density must be >= 0");
  if (speed < 0.0) throw ValueError("traffic_flow: speed must be >= 0");
  return density * speed;
}

/// Traffic density ratio (current - free) / (congested - free). Returned
/// unclamped; values outside [0, 1] mean the current density lies outside
/// the profile band. Classification clamps.
inline double tdr(double current_density, const DensityProfile& profile) {
  validate(profile);
  return (current_density - profile.free_flow_density) /
         (profile.congested_density - profile.free_flow_density);
}

inline CongestionLevel classify_congestion(double tdr_value, const CongestionThresholds& t) {
  if (!(t.low >= 0.0 && t.low < t.high && t.high <= 1.0)) {
    throw ValueError("congestion thresholds: need 0 <= low < high <= 1");
  }
  const double clamped = std::min(std::max(tdr_value, 0.0), 1.0);
  CongestionLevel level;
  level.tdr = tdr_value;
  if (clamped < t.low) {
    level.band = CongestionBand::Free;
  } else if (clamped <= t.high) {
    level.band = CongestionBand::Moderate;
  } else {
    level.band = CongestionBand::Congested;
  }
  return level;
}

/// Which blocks go into a feature vector and how many past observations of
/// flow to include. A window must hold lags + 1 observations (the current
/// one plus `lags` predecessors). Flow values are scaled to [0, 1] by
/// [flow_scale_lo, flow_scale_hi], normally the training split's flow range.
struct FeatureSpec {
  std::size_t lags = 12;
  bool include_density = true;
  bool include_time = true;
  bool include_weather = true;
  bool include_event = true;
  double flow_scale_lo = 0.0;
  double flow_scale_hi = 1.0;

  std::size_t window_length() const { return lags + 1; }
  std::size_t dimension() const {
    return (lags + 1) + (include_density ? 1 : 0) + (include_time ? 2 : 0) +
           (include_weather ? 4 : 0) + (include_event ? 4 : 0);
  }
};

inline double normalize_flow(double flow, const FeatureSpec& spec) {
  if (!(spec.flow_scale_hi > spec.flow_scale_lo)) {
    throw ValueError("feature spec: flow scale must have hi > lo");
  }
  return (flow - spec.flow_scale_lo) / (spec.flow_scale_hi - spec.flow_scale_lo);
}

inline double denormalize_flow(double value, const FeatureSpec& spec) {
  return value * (spec.flow_scale_hi - spec.flow_scale_lo) + spec.flow_scale_lo;
}

/// Feature vector for the newest observation of a time-ordered window:
/// normalized flows (oldest to newest), then the current density, cyclical
/// hour-of-day (sin, cos), weather scalars, and the event one-hot.
inline Vector build_features(std::span<const TrafficObservation> window, const FeatureSpec& spec) {
  if (window.size() != spec.window_length()) {
    throw DimensionError("build_features: window length " + std::to_string(window.size()) +
                         " != lags + 1 = " + std::to_string(spec.window_length()));
  }
  for (std::size_t i = 1; i < window.size(); ++i) {
    if (window[i].timestamp < window[i - 1].timestamp) {
      throw ValueError("build_features: window timestamps out of order");
    }
  }
  const TrafficObservation& now = window.back();

  Vector out;
  out.reserve(spec.dimension());
  for (const TrafficObservation& obs : window) out.push_back(normalize_flow(obs.flow, spec));
  if (spec.include_density) {
    double density;
    if (now.density) {
      density = *now.density;
    } else if (now.speed > 0.0) {
      density = now.flow / now.speed;  // Q = K * V rearranged
    } else {
      throw ValueError("build_features: density missing and not derivable (speed is 0)");
    }
    out.push_back(density);
  }
  if (spec.include_time) {
    const double seconds_of_day = std::fmod(std::fmod(now.timestamp, 86400.0) + 86400.0, 86400.0);
    const double angle = 2.0 * M_PI * seconds_of_day / 86400.0;
    out.push_back(std::sin(angle));
    out.push_back(std::cos(angle));
  }
  if (spec.include_weather) {
    out.push_back(now.temperature);
    out.push_back(now.humidity);
    out.push_back(now.precipitation);
    out.push_back(now.wind_speed);
  }
  if (spec.include_event) {
    for (EventFlag f : {EventFlag::None, EventFlag::Accident, EventFlag::Closure,
                        EventFlag::ScheduledEvent}) {
      out.push_back(now.event == f ? 1.0 : 0.0);
    }
  }
  return out;
}

}  // namespace rbflow
