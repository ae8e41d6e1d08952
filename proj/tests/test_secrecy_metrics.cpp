#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "irssec/oracle.hpp"
#include "irssec/secrecy_metrics.hpp"
#include "test_util.hpp"

using namespace irssec;
using namespace irssec::testing;

TEST_CASE("quantize_one_bit examples") {
  CVectorXd s(2);
  s << cd(1.0, 1.0), cd(-0.3, 2.0);
  const CVectorXd x = quantize_one_bit(s).vector();
  CHECK(std::abs(x(0) - cd(0.5, 0.5)) < 1e-15);
  CHECK(std::abs(x(1) - cd(-0.5, 0.5)) < 1e-15);

  SUBCASE("idempotent on the alphabet") {
    CHECK(quantize_one_bit(x).vector() == x);
  }
  SUBCASE("zero components map to +a") {
    CVectorXd z(3);
    z << cd(0.0, -1.0), cd(2.0, 0.0), cd(0.0, 0.0);
    const double a = one_bit_amplitude(3);
    const CVectorXd q = quantize_one_bit(z).vector();
    CHECK(q(0) == cd(a, -a));
    CHECK(q(1) == cd(a, a));
    CHECK(q(2) == cd(a, a));
  }
  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(quantize_one_bit(CVectorXd(0)), DomainError);
  }
}

TEST_CASE("quantized vectors are members of the one-bit set") {
  Rng rng(1);
  for (int M : {1, 2, 5, 16, 64}) {
    for (int k = 0; k < 20; ++k) {
      const CVectorXd x = quantize_one_bit(complex_gaussian<double>(M, 1, rng).col(0)).vector();
      const Membership m = one_bit_membership(x);
      CHECK(m.member);
      CHECK(m.max_violation <= 1e-12);
      CHECK(std::abs(x.norm() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("one_bit_membership rejects a scaled alphabet point") {
  CVectorXd x(2);
  x << cd(0.5, 0.5), cd(0.5, 0.5);
  x *= 0.9;
  const Membership m = one_bit_membership(x);
  CHECK_FALSE(m.member);
  CHECK(m.max_violation == doctest::Approx(1.0 - 0.81));
}

TEST_CASE("one_bit_membership on a dense boundary sample") {
  // Points on the unit sphere built from alphabet points by moving one
  // coordinate inward fail; only the alphabet passes.
  Rng rng(4);
  std::uniform_real_distribution<double> shrink(0.0, 0.999);
  for (int M = 1; M <= 4; ++M) {
    const double a = one_bit_amplitude(M);
    for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << (2 * M)); ++idx) {
      const CVectorXd x = oracle::candidate_from_index(M, idx);
      CHECK(one_bit_membership(x).member);
      for (int rep = 0; rep < 5; ++rep) {
        CVectorXd y = x;
        y(0) = cd(y(0).real() * shrink(rng), y(0).imag());
        y.normalize();
        if (std::abs(std::abs(y(0).real()) - a) > 1e-9) CHECK_FALSE(one_bit_membership(y).member);
      }
    }
  }
}

TEST_CASE("composite_channel") {
  Rng rng(6);
  SUBCASE("zero reflected link returns the direct channel") {
    const CMatrixXd d = complex_gaussian<double>(3, 4, rng);
    const CMatrixXd g = complex_gaussian<double>(5, 4, rng);
    const CVectorXd theta = random_phases(5, rng);
    CHECK(composite_channel(d, CMatrixXd::Zero(3, 5).eval(), g, theta) == d);
  }
  SUBCASE("scalar case") {
    CMatrixXd d(1, 1), h(1, 1), g(1, 1);
    d << cd(0.2, -0.1);
    h << cd(1.5, 0.3);
    g << cd(-0.7, 0.4);
    CVectorXd theta(1);
    theta << std::polar(1.0, 0.9);
    const CMatrixXd H = composite_channel(d, h, g, theta);
    CHECK(std::abs(H(0, 0) - (h(0, 0) * theta(0) * g(0, 0) + d(0, 0))) < 1e-15);
  }
  SUBCASE("matches an entry-wise loop") {
    const CMatrixXd d = complex_gaussian<double>(2, 2, rng);
    const CMatrixXd h = complex_gaussian<double>(2, 3, rng);
    const CMatrixXd g = complex_gaussian<double>(3, 2, rng);
    const CVectorXd theta = random_phases(3, rng);
    const CMatrixXd H = composite_channel(d, h, g, theta);
    for (int r = 0; r < 2; ++r)
      for (int m = 0; m < 2; ++m) {
        cd acc = d(r, m);
        for (int n = 0; n < 3; ++n) acc += h(r, n) * theta(n) * g(n, m);
        CHECK(std::abs(H(r, m) - acc) < 1e-14);
      }
  }
  SUBCASE("shape mismatch") {
    const CMatrixXd d = complex_gaussian<double>(2, 2, rng);
    const CMatrixXd h = complex_gaussian<double>(2, 3, rng);
    const CMatrixXd g = complex_gaussian<double>(3, 2, rng);
    CHECK_THROWS_AS(composite_channel(d, h, g, random_phases(4, rng)), DomainError);
    CHECK_THROWS_AS(composite_channel(d, h, complex_gaussian<double>(3, 3, rng), random_phases(3, rng)), DomainError);
  }
}

TEST_CASE("rate examples") {
  CVectorXd x(2);
  x << cd(0.5, 0.5), cd(-0.5, 0.5);
  CHECK(rate(CMatrixXd::Zero(3, 2), x) == 0.0);
  // ‖h x‖^2 = 1 and 3 with a single row aligned to x.
  const CMatrixXd h1 = x.adjoint();
  CHECK(rate(h1, x) == doctest::Approx(1.0).epsilon(1e-14));
  const CMatrixXd h3 = std::sqrt(3.0) * h1;
  CHECK(rate(h3, x) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(rate(CMatrixXd::Zero(3, 3), x), DomainError);
}

TEST_CASE("rate is monotone in the received power") {
  Rng rng(8);
  const CVectorXd x = random_unit(4, rng);
  const CMatrixXd H = complex_gaussian<double>(3, 4, rng);
  double previous = -1.0;
  for (double s = 0.0; s < 5.0; s += 0.25) {
    const double r = rate((s * H).eval(), x);
    CHECK(r > previous);
    previous = r;
  }
}

TEST_CASE("secrecy_rate examples") {
  const SystemConfig c = tiny_config(4, 3);
  Channels ch = generate_channels(c, 3);
  Rng rng(2);
  const CVectorXd x = quantize_one_bit(complex_gaussian<double>(4, 1, rng).col(0)).vector();
  const CVectorXd theta = random_phases(3, rng);

  SUBCASE("identical channels give zero") {
    Channels same = ch;
    same.h_ae = same.h_ab;
    same.h_ie = same.h_ib;
    CHECK(secrecy_rate(same, x, theta) == 0.0);
  }
  SUBCASE("silent eavesdropper with unit received power gives one bit") {
    Channels quiet = ch;
    quiet.h_ae.setZero();
    quiet.h_ie.setZero();
    quiet.h_ib.setZero();
    quiet.h_ab.setZero();
    quiet.h_ab.row(0) = x.adjoint();
    CHECK(secrecy_rate(quiet, x, theta) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("difference form equals the clamped ratio form") {
    for (int k = 0; k < 30; ++k) {
      const Channels inst = generate_channels(c, static_cast<std::uint64_t>(100 + k));
      const CVectorXd xs = quantize_one_bit(complex_gaussian<double>(4, 1, rng).col(0)).vector();
      const CVectorXd th = random_phases(3, rng);
      const double loop = oracle::loop_log_ratio(inst, xs, th);
      CHECK(secrecy_log_ratio(inst, xs, th) == doctest::Approx(loop).epsilon(1e-12));
      CHECK(secrecy_rate(inst, xs, th) == doctest::Approx(std::max(0.0, loop)).epsilon(1e-12));
    }
  }
}

TEST_CASE("secrecy_rate is invariant to a global phase on x") {
  const SystemConfig c = tiny_config(6, 5);
  Rng rng(12);
  for (int k = 0; k < 20; ++k) {
    const Channels ch = generate_channels(c, static_cast<std::uint64_t>(k));
    const CVectorXd x = random_unit(6, rng);
    const CVectorXd theta = random_phases(5, rng);
    const cd rot = std::polar(1.0, 2.0 * M_PI * k / 20.0);
    CHECK(secrecy_log_ratio(ch, (rot * x).eval(), theta) == doctest::Approx(secrecy_log_ratio(ch, x, theta)).epsilon(1e-12));
  }
}

TEST_CASE("IrsPhases helpers") {
  RVector<double> ang(3);
  ang << 0.0, M_PI / 2, -M_PI;
  const IrsPhases p = IrsPhases::from_angles(ang);
  CHECK(unit_modulus_violation(p.vector()) < 1e-15);
  CHECK(std::abs(p.vector()(1) - cd(0.0, 1.0)) < 1e-15);

  CVectorXd raw(3);
  raw << cd(3.0, 4.0), cd(0.0, 0.0), cd(0.0, -2.0);
  const IrsPhases q = IrsPhases::project(raw);
  CHECK(std::abs(q.vector()(0) - cd(0.6, 0.8)) < 1e-15);
  CHECK(q.vector()(1) == cd(1.0, 0.0));
  CHECK(std::abs(q.vector()(2) - cd(0.0, -1.0)) < 1e-15);
}

TEST_CASE("alphabet_distance") {
  const CVectorXd x = oracle::candidate_from_index(3, 17);
  CHECK(alphabet_distance(x) == 0.0);
  CVectorXd y = x;
  y(1) += cd(1e-3, 0.0);
  CHECK(alphabet_distance(y) == doctest::Approx(1e-3).epsilon(1e-9));
}
