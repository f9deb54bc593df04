#pragma once
// Channel gain and achievable-rate math: finite-blocklength rates for short
// URLLC packets and ergodic (Shannon) capacity for delay-tolerant traffic
// under Rayleigh fading with unit-mean exponential power gain.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace edgetwin {

struct LinkGain {
  double alpha = 0.0;  // large-scale channel gain, linear
  double distance_m = 0.0;
  double shadowing_db = 0.0;
};

struct RadioConfig {
  double subcarrier_hz = 120e3;                     // bandwidth W per subcarrier
  double noise_w_per_hz = 3.9810717055349725e-21;   // N0, -174 dBm/Hz
  double slot_s = 0.125e-3;                         // slot duration Ts
  double snr_loss = 1.0;                            // coding-gap coefficient Phi
  int max_subcarriers = 128;                        // per-AP subcarrier budget
  double max_tx_power_w = 0.19952623149688797;      // 23 dBm
};

/// Linear power gain for path loss 35.3 + 37.6*log10(d) dB plus shadowing.
inline double path_loss_gain(double distance_m, double shadowing_db) {
  if (!(distance_m > 0.0)) {
    throw std::domain_error("path_loss_gain: distance must be positive");
  }
  const double loss_db = 35.3 + 37.6 * std::log10(distance_m) + shadowing_db;
  return std::pow(10.0, -loss_db / 10.0);
}

inline double q_function(double x) {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

/// Inverse Gaussian Q-function. Rational approximation for the start point,
/// then Newton steps on erfc; good to ~1 ulp for p down to the denormal range.
inline double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("q_inverse: p must lie in (0,1)");
  }
  // Acklam's inverse-normal approximation for Phi^{-1}(p); Q^{-1}(p) = -Phi^{-1}(p).
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;  // Phi^{-1}(p)
  if (p < p_low) {
    const double u = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double u = p - 0.5;
    const double r = u * u;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double u = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  double q = -x;
  // Newton polish on Q(q) - p = 0; derivative of Q is -phi.
  constexpr double inv_sqrt_2pi = 0.3989422804014327;
  for (int it = 0; it < 3; ++it) {
    const double phi = inv_sqrt_2pi * std::exp(-0.5 * q * q);
    if (phi <= 0.0) break;
    q += (q_function(q) - p) / phi;
  }
  return q;
}

namespace detail {

/// e^x * E1(x) for x > 0, without under/overflow. Series below 1, modified
/// Lentz continued fraction above.
inline double exp_e1_scaled(double x) {
  if (!(x > 0.0)) throw std::domain_error("exp_e1_scaled: x must be positive");
  if (x < 1.0) {
    // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
    constexpr double euler_gamma = 0.5772156649015328606;
    double sum = 0.0, term = 1.0;
    for (int k = 1; k <= 40; ++k) {
      term *= -x / k;
      const double add = -term / k;
      sum += add;
      if (std::fabs(add) < 1e-18 * (std::fabs(sum) + 1.0)) break;
    }
    return std::exp(x) * (-euler_gamma - std::log(x) + sum);
  }
  // Continued fraction: E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
  constexpr double tiny = 1e-300;
  double b = x + 1.0, c = 1.0 / tiny, dd = 1.0 / b, h = dd;
  for (int i = 1; i <= 200; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    dd = an * dd + b;
    if (std::fabs(dd) < tiny) dd = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    dd = 1.0 / dd;
    const double del = dd * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace detail

/// Short-packet achievable rate in bits/s over n_sub subcarriers with the
/// channel-dispersion penalty. May be negative at very low SNR; callers treat
/// non-positive values as zero rate.
inline double urllc_rate(double n_sub, double small_gain, double power_w,
                         const LinkGain& link, const RadioConfig& rc,
                         double decode_err) {
  if (!(n_sub > 0.0)) throw std::domain_error("urllc_rate: n_sub must be positive");
  if (!(small_gain > 0.0)) throw std::domain_error("urllc_rate: small gain must be positive");
  if (power_w < 0.0) throw std::domain_error("urllc_rate: power must be nonnegative");
  const double bw = n_sub * rc.subcarrier_hz;
  const double snr = link.alpha * small_gain * power_w / (rc.snr_loss * bw * rc.noise_w_per_hz);
  const double one_plus = 1.0 + snr;
  const double dispersion = 1.0 - 1.0 / (one_plus * one_plus);
  return bw / std::numbers::ln2 *
         (std::log1p(snr) - std::sqrt(dispersion / (rc.slot_s * bw)) * q_inverse(decode_err));
}

/// Power coefficient: required transmit power to deliver packet_bits in one
/// slot with decode error decode_err is (returned value) / g_threshold.
/// Uses the high-SNR dispersion approximation.
inline double urllc_power_coefficient(double n_sub, const LinkGain& link,
                                      const RadioConfig& rc, double packet_bits,
                                      double decode_err) {
  if (!(n_sub > 0.0)) throw std::domain_error("urllc_power_coefficient: n_sub must be positive");
  if (packet_bits < 0.0) throw std::domain_error("urllc_power_coefficient: bits must be nonnegative");
  const double symbols = rc.slot_s * n_sub * rc.subcarrier_hz;  // Ts*N*W
  const double expo = std::sqrt(1.0 / symbols) * q_inverse(decode_err) +
                      packet_bits * std::numbers::ln2 / symbols;
  return n_sub * rc.subcarrier_hz * rc.noise_w_per_hz / link.alpha * std::expm1(expo);
}

/// Ergodic capacity E_g[n W log2(1 + alpha g P / (n W N0))] in bits/s for a
/// unit-mean exponential g. Evaluated through the closed form
/// E[ln(1+a g)] = e^{1/a} E1(1/a), which is exact for this fading law.
inline double ergodic_capacity(double n_sub, double power_w, const LinkGain& link,
                               const RadioConfig& rc) {
  if (!(n_sub > 0.0)) throw std::domain_error("ergodic_capacity: n_sub must be positive");
  if (power_w < 0.0) throw std::domain_error("ergodic_capacity: power must be nonnegative");
  if (power_w == 0.0) return 0.0;
  const double bw = n_sub * rc.subcarrier_hz;
  const double a = link.alpha * power_w / (bw * rc.noise_w_per_hz);
  if (a <= 0.0 || !std::isfinite(a)) return 0.0;
  return bw / std::numbers::ln2 * detail::exp_e1_scaled(1.0 / a);
}

/// Minimal transmit power whose ergodic capacity reaches rate_bits_per_s,
/// found by bisection on [0, power_cap_w] to 1e-9 relative precision.
/// Empty if the target is unreachable at the cap.
inline std::optional<double> required_power_dt(double rate_bits_per_s, double n_sub,
                                               const LinkGain& link, const RadioConfig& rc,
                                               double power_cap_w) {
  if (rate_bits_per_s < 0.0) throw std::domain_error("required_power_dt: negative rate target");
  if (rate_bits_per_s == 0.0) return 0.0;
  if (ergodic_capacity(n_sub, power_cap_w, link, rc) < rate_bits_per_s) return std::nullopt;
  double lo = 0.0, hi = power_cap_w;
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (ergodic_capacity(n_sub, mid, link, rc) >= rate_bits_per_s) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace edgetwin
