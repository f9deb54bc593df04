#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "edgetwin/phy.hpp"
#include "edgetwin/rng.hpp"

using namespace edgetwin;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const RadioConfig kTable3{};  // defaults carry the reference configuration

// Independent oracle for E[ln(1 + a g)], g ~ Exp(1): adaptive Simpson on
// [0, 60] with a split at the curvature knee 1/a.
double simpson(double (*f)(double, double), double a, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  return (hi - lo) / 6.0 * (f(lo, a) + 4.0 * f(mid, a) + f(hi, a));
}

double integrand(double g, double a) { return std::exp(-g) * std::log1p(a * g); }

double adaptive(double a, double lo, double hi, double whole, double tol, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double left = simpson(integrand, a, lo, mid);
  const double right = simpson(integrand, a, mid, hi);
  if (depth > 40 || std::fabs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive(a, lo, mid, left, tol / 2.0, depth + 1) +
         adaptive(a, mid, hi, right, tol / 2.0, depth + 1);
}

double expected_log_oracle(double a) {
  const double knee = std::min(1.0 / a, 30.0);
  double total = 0.0;
  for (const auto& [lo, hi] : {std::pair{0.0, knee}, std::pair{knee, 60.0}}) {
    total += adaptive(a, lo, hi, simpson(integrand, a, lo, hi), 1e-14, 0);
  }
  return total;
}

}  // namespace

TEST_CASE("path loss gain matches the 35.3 + 37.6 log10(d) model") {
  CHECK_THAT(path_loss_gain(1.0, 0.0), WithinRel(2.9512092266663857e-4, 1e-12));
  // 100 m: 110.5 dB loss
  CHECK_THAT(path_loss_gain(100.0, 0.0), WithinRel(8.9125093813374553e-12, 1e-12));
  // 10 m with 8 dB shadowing: 80.9 dB loss
  CHECK_THAT(path_loss_gain(10.0, 8.0), WithinRel(8.1283051616409925e-9, 1e-12));
  CHECK_THROWS_AS(path_loss_gain(0.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(path_loss_gain(-3.0, 0.0), std::domain_error);
}

TEST_CASE("q_inverse hits tabulated points and round-trips") {
  CHECK_THAT(q_inverse(0.5), WithinAbs(0.0, 1e-12));
  CHECK_THAT(q_inverse(5e-8), WithinRel(5.3267238863844963, 1e-10));
  for (double p : {1e-3, 1e-5, 1e-7}) {
    CHECK_THAT(q_function(q_inverse(p)), WithinRel(p, 1e-9));
  }
  CHECK_THROWS_AS(q_inverse(0.0), std::domain_error);
  CHECK_THROWS_AS(q_inverse(1.0), std::domain_error);
}

TEST_CASE("urllc_rate reproduces the finite-blocklength value") {
  LinkGain link{1.0, 0.0, 0.0};
  SECTION("zero power carries nothing") {
    CHECK(urllc_rate(4.0, 1.0, 0.0, link, kTable3, 5e-8) == 0.0);
  }
  SECTION("eps = 0.5 removes the dispersion penalty") {
    const double p = 0.05;
    const double bw = 4.0 * kTable3.subcarrier_hz;
    const double snr = link.alpha * p / (bw * kTable3.noise_w_per_hz);
    const double shannon = bw * std::log2(1.0 + snr);
    CHECK_THAT(urllc_rate(4.0, 1.0, p, link, kTable3, 0.5), WithinRel(shannon, 1e-12));
  }
  SECTION("frozen point: N=4, post-gap SNR 100, eps 5e-8") {
    const double p = 100.0 * 4.0 * kTable3.subcarrier_hz * kTable3.noise_w_per_hz;
    CHECK_THAT(urllc_rate(4.0, 1.0, p, link, kTable3, 5e-8),
               WithinRel(2719752.8518832144, 1e-9));
  }
  SECTION("clamped rate nondecreasing in power and in small-scale gain") {
    // Negative raw values mean "no usable rate"; callers clamp at zero.
    double prev = 0.0;
    for (int i = 0; i < 120; ++i) {
      const double p = 1e-16 * std::pow(10.0, i / 10.0);
      const double r =
          std::max(0.0, urllc_rate(4.0, 1.0, p, LinkGain{1e-11, 0, 0}, kTable3, 5e-8));
      CHECK(r >= prev - 1e-9);
      prev = r;
    }
    prev = 0.0;
    for (int i = 0; i < 120; ++i) {
      const double g = 1e-3 * std::pow(10.0, i / 15.0);
      const double r =
          std::max(0.0, urllc_rate(4.0, g, 0.1, LinkGain{1e-11, 0, 0}, kTable3, 5e-8));
      CHECK(r >= prev - 1e-9);
      prev = r;
    }
  }
}

TEST_CASE("urllc_power_coefficient matches the closed form") {
  SECTION("no data and eps=0.5 costs nothing") {
    LinkGain link{1e-11, 0, 0};
    CHECK(urllc_power_coefficient(8.0, link, kTable3, 0.0, 0.5) == 0.0);
  }
  SECTION("frozen point: N=8, b=256 bits, eps_d=5e-8, alpha=1e-11") {
    LinkGain link{1e-11, 0, 0};
    CHECK_THAT(urllc_power_coefficient(8.0, link, kTable3, 256.0, 5e-8),
               WithinRel(2.3445907518737739e-3, 1e-9));
  }
  SECTION("doubling alpha halves the coefficient") {
    LinkGain a{1e-11, 0, 0}, b{2e-11, 0, 0};
    const double va = urllc_power_coefficient(6.0, a, kTable3, 256.0, 5e-8);
    const double vb = urllc_power_coefficient(6.0, b, kTable3, 256.0, 5e-8);
    CHECK_THAT(va, WithinRel(2.0 * vb, 1e-12));
  }
  SECTION("decreasing in N below the stationary point") {
    LinkGain link{1e-11, 0, 0};
    // The stationary point for these parameters sits far above 40 subcarriers.
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 100; ++i) {
      const double n = 0.4 * i;
      const double v = urllc_power_coefficient(n, link, kTable3, 256.0, 5e-8);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("ergodic capacity agrees with quadrature and Monte-Carlo oracles") {
  SECTION("zero power") {
    CHECK(ergodic_capacity(16.0, 0.0, LinkGain{1e-11, 0, 0}, kTable3) == 0.0);
  }
  SECTION("frozen point: N=16, alpha=1e-11, P=0.2") {
    CHECK_THAT(ergodic_capacity(16.0, 0.2, LinkGain{1e-11, 0, 0}, kTable3),
               WithinRel(13885189.687227351, 1e-10));
  }
  SECTION("strictly increasing in power") {
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
      const double c = ergodic_capacity(8.0, 0.002 * i, LinkGain{1e-11, 0, 0}, kTable3);
      CHECK(c > prev);
      prev = c;
    }
  }
  SECTION("adaptive quadrature, 20 random draws, 1e-8 relative") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 20; ++t) {
      const double n = rng_uniform(rng, 1.0, 64.0);
      const double alpha = std::pow(10.0, rng_uniform(rng, -13.0, -8.0));
      const double p = rng_uniform(rng, 1e-4, 0.2);
      const double bw = n * kTable3.subcarrier_hz;
      const double a = alpha * p / (bw * kTable3.noise_w_per_hz);
      const double expect = bw / std::numbers::ln2 * expected_log_oracle(a);
      CHECK_THAT(ergodic_capacity(n, p, LinkGain{alpha, 0, 0}, kTable3),
                 WithinRel(expect, 1e-8));
    }
  }
  SECTION("Monte-Carlo within 3 standard errors, 20 random draws") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
      const double n = rng_uniform(rng, 1.0, 48.0);
      const double alpha = std::pow(10.0, rng_uniform(rng, -12.5, -9.0));
      const double p = rng_uniform(rng, 1e-3, 0.2);
      const double bw = n * kTable3.subcarrier_hz;
      const double a = alpha * p / (bw * kTable3.noise_w_per_hz);
      const long samples = 1000000;
      double sum = 0.0, sq = 0.0;
      for (long i = 0; i < samples; ++i) {
        const double g = -std::log(1.0 - rng_uniform(rng));
        const double v = std::log2(1.0 + a * g);
        sum += v;
        sq += v * v;
      }
      const double mean = sum / samples;
      const double se = std::sqrt((sq / samples - mean * mean) / samples);
      const double cap = ergodic_capacity(n, p, LinkGain{alpha, 0, 0}, kTable3);
      CHECK(std::fabs(cap / bw - mean) <= 3.0 * se + 1e-12);
    }
  }
}

TEST_CASE("required_power_dt inverts the capacity") {
  LinkGain link{1e-11, 0, 0};
  SECTION("zero rate needs zero power") {
    REQUIRE(required_power_dt(0.0, 8.0, link, kTable3, 0.2).value() == 0.0);
  }
  SECTION("round trip within 1e-6 relative") {
    for (double p : {1e-4, 1e-3, 0.01, 0.05, 0.19}) {
      const double rate = ergodic_capacity(8.0, p, link, kTable3);
      const auto back = required_power_dt(rate, 8.0, link, kTable3, 0.2);
      REQUIRE(back.has_value());
      CHECK_THAT(*back, WithinRel(p, 1e-6));
    }
  }
  SECTION("unreachable target is infeasible, not an exception") {
    const double cap = ergodic_capacity(8.0, 0.2, link, kTable3);
    CHECK_FALSE(required_power_dt(cap * 1.01, 8.0, link, kTable3, 0.2).has_value());
  }
  SECTION("monotone nondecreasing in the rate target") {
    double prev = 0.0;
    const double cap = ergodic_capacity(8.0, 0.2, link, kTable3);
    for (int i = 1; i <= 100; ++i) {
      const auto p = required_power_dt(cap * i / 101.0, 8.0, link, kTable3, 0.2);
      REQUIRE(p.has_value());
      CHECK(*p >= prev - 1e-15);
      prev = *p;
    }
  }
}
