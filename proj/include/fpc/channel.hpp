#pragma once

// Line-of-sight UAV-to-UAV link budget: free-space path loss, SNR, BPSK bit
// error rate, link predicate and Shannon capacity. All hot-path math is in the
// linear domain; dB quantities are converted once by ChannelParams::from_db.

#include <cmath>
#include <limits>
#include <numbers>

#include "fpc/error.hpp"

namespace fpc {

inline constexpr double kSpeedOfLight = 299792458.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Complementary error function, relative error well below 1e-10 on [0, 12].
/// Positive-term series below 2, Lentz continued fraction above.
inline double erfc(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) return 2.0 - erfc(-x);
  if (x == 0.0) return 1.0;
  // exp(-x^2) with the rounding error of x*x folded back in.
  const double hi = x * x;
  const double lo = std::fma(x, x, -hi);
  const double gauss = std::exp(-hi) * (1.0 - lo);
  if (x < 2.0) {
    // erf(x) = 2/sqrt(pi) e^{-x^2} sum_n 2^n x^{2n+1} / (2n+1)!!
    double term = x;
    double sum = x;
    for (int n = 1; n < 200; ++n) {
      term *= 2.0 * hi / (2.0 * n + 1.0);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return 1.0 - 2.0 * std::numbers::inv_sqrtpi * gauss * sum;
  }
  if (gauss == 0.0) return 0.0;
  // erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
  constexpr double tiny = 1e-300;
  double f = x;
  double c = f;
  double d = 0.0;
  for (int n = 1; n < 1000; ++n) {
    const double a = 0.5 * n;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    d = 1.0 / d;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::numbers::inv_sqrtpi * gauss / f;
}

/// Link-budget parameters, linear domain. EIRP and noise share a power unit
/// (mW after from_db), so only their ratio matters.
struct ChannelParams {
  double carrier_frequency = 2.4e9;  // Hz
  double los_attenuation = 1.0;      // linear loss factor, >= 1
  double eirp = 1.0;                 // mW
  double rx_gain = 1.0;              // linear
  double noise_power = 1e-10;        // mW
  double bandwidth = 20e6;           // Hz
  double ber_threshold = 1e-5;

  struct Db {
    double carrier_frequency_hz;
    double los_attenuation_db;
    double eirp_dbm;
    double rx_gain_db;
    double noise_power_dbm;
    double bandwidth_hz;
    double ber_threshold;
  };

  static ChannelParams from_db(const Db& db) {
    ChannelParams p;
    p.carrier_frequency = db.carrier_frequency_hz;
    p.los_attenuation = db_to_linear(db.los_attenuation_db);
    p.eirp = db_to_linear(db.eirp_dbm);
    p.rx_gain = db_to_linear(db.rx_gain_db);
    p.noise_power = db_to_linear(db.noise_power_dbm);
    p.bandwidth = db.bandwidth_hz;
    p.ber_threshold = db.ber_threshold;
    p.validate();
    return p;
  }

  /// The evaluation scenario of the system-parameter table.
  static ChannelParams reference() { return from_db({2.4e9, 3.0, 20.0, 3.0, -100.0, 20e6, 1e-5}); }

  void validate(double max_ber_threshold = 0.5) const {
    if (!(carrier_frequency > 0.0)) throw ContractError("carrier_frequency must be > 0");
    if (!(bandwidth > 0.0)) throw ContractError("bandwidth must be > 0");
    if (!(ber_threshold > 0.0 && ber_threshold < max_ber_threshold)) {
      throw ContractError("ber_threshold must lie in (0, 0.5)");
    }
    if (!(los_attenuation >= 1.0)) throw ContractError("los_attenuation must be >= 1 (a loss)");
    if (!(eirp > 0.0) || !(rx_gain > 0.0) || !(noise_power > 0.0)) {
      throw ContractError("eirp, rx_gain and noise_power must be positive");
    }
  }
};

struct LinkMetrics {
  double path_loss = 0.0;
  double snr = 0.0;
  double ber = 0.5;
  bool connected = false;
  double capacity = 0.0;  // bit/s
  double unit_bit_delay = std::numeric_limits<double>::infinity();  // s/bit
};

inline double path_loss(double d, const ChannelParams& params) {
  if (!(d > 0.0)) throw DomainError("path loss undefined for non-positive distance");
  const double g = 4.0 * std::numbers::pi * d * params.carrier_frequency / kSpeedOfLight;
  return g * g * params.los_attenuation;
}

/// BER, link predicate and capacity for a given SNR (linear).
inline LinkMetrics link_metrics_from_snr(double snr, const ChannelParams& params) {
  LinkMetrics m;
  m.snr = snr;
  m.ber = 0.5 * erfc(std::sqrt(snr));
  m.connected = m.ber <= params.ber_threshold;
  if (m.connected) {
    m.capacity = params.bandwidth * std::log2(1.0 + snr);
    m.unit_bit_delay = 1.0 / m.capacity;
  }
  return m;
}

inline LinkMetrics link_metrics(double d, const ChannelParams& params) {
  const double loss = path_loss(d, params);
  const double snr = (params.eirp * params.rx_gain) / (loss * params.noise_power);
  LinkMetrics m = link_metrics_from_snr(snr, params);
  m.path_loss = loss;
  return m;
}

}  // namespace fpc
