#include <catch2/catch.hpp>
#include <cmath>

#include "tsfd/concave.hpp"
#include "tsfd/errors.hpp"
#include "tsfd/rng.hpp"

using namespace tsfd;

TEST_CASE("shifted log evaluates, inverts and differentiates", "[concave]") {
  const ConcaveFn f = ConcaveFn::shifted_log(0.0);
  CHECK(f(1.0) == 0.0);
  CHECK(f(std::exp(1.0)) == Approx(1.0));
  CHECK(f.inverse(f(0.37)) == Approx(0.37).margin(1e-12));
  CHECK(f.derivative(2.0) == Approx(0.5));
  CHECK_FALSE(f.in_domain(0.0));
  CHECK_THROWS_AS(f(0.0), DomainError);
  CHECK_THROWS_AS(f(-1.0), DomainError);

  const ConcaveFn g = ConcaveFn::shifted_log(-0.6);
  CHECK(g.domain_lower_bound() == Approx(0.6));
  CHECK(g.in_domain(0.7));
  CHECK_FALSE(g.in_domain(0.6));
  CHECK(g(1.6) == Approx(0.0));
  CHECK(g.inverse(0.0) == Approx(1.6));
}

TEST_CASE("piecewise linear matches the two-slope construction", "[concave]") {
  const ConcaveFn f = ConcaveFn::piecewise_linear({4.0, 1.0}, {0.95});
  CHECK(f(0.95) == 0.0);
  CHECK(f(0.0) == Approx(-3.8));
  CHECK(f(2.0) == Approx(1.05));
  CHECK(f.derivative(0.5) == 4.0);
  CHECK(f.derivative(1.5) == 1.0);
  CHECK(f.inverse(-3.8) == Approx(0.0).margin(1e-12));
  CHECK(f.inverse(1.05) == Approx(2.0).margin(1e-12));
  CHECK(f.in_domain(-100.0));  // whole real line
}

TEST_CASE("piecewise linear with three segments", "[concave]") {
  const ConcaveFn f = ConcaveFn::piecewise_linear({3.0, 2.0, 0.5}, {1.0, 2.0});
  CHECK(f(1.0) == 0.0);
  CHECK(f(2.0) == Approx(2.0));   // slope 2 on [1,2]
  CHECK(f(4.0) == Approx(3.0));   // 2 + 0.5*2
  CHECK(f(0.0) == Approx(-3.0));  // slope 3 left of 1
  CHECK(f.inverse(2.0) == Approx(2.0).margin(1e-12));
  CHECK(f.inverse(3.0) == Approx(4.0).margin(1e-12));
}

TEST_CASE("piecewise linear rejects bad shapes", "[concave]") {
  CHECK_THROWS_AS(ConcaveFn::piecewise_linear({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(ConcaveFn::piecewise_linear({1.0, 2.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(ConcaveFn::piecewise_linear({2.0, -1.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(ConcaveFn::piecewise_linear({2.0, 1.0}, {1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(ConcaveFn::piecewise_linear({2.0, 1.0}, {}), std::invalid_argument);
}

TEST_CASE("random piecewise linear functions are increasing, concave, invertible", "[concave]") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int pieces = 2 + static_cast<int>(rng.below(3));
    std::vector<double> slopes(pieces);
    double s = rng.uniform(2.0, 5.0);
    for (int i = 0; i < pieces; ++i) {
      slopes[i] = s;
      s *= rng.uniform(0.3, 0.8);
    }
    std::vector<double> breaks(pieces - 1);
    double b = rng.uniform(-1.0, 1.0);
    for (int i = 0; i + 1 < pieces; ++i) {
      breaks[i] = b;
      b += rng.uniform(0.2, 1.5);
    }
    const ConcaveFn f = ConcaveFn::piecewise_linear(slopes, breaks);
    double prev_x = -5.0, prev_y = f(-5.0);
    for (int k = 1; k <= 40; ++k) {
      const double x = -5.0 + 10.0 * k / 40.0;
      const double y = f(x);
      CHECK(y > prev_y);  // strictly increasing
      CHECK(f.inverse(y) == Approx(x).margin(1e-9));
      if (k >= 2) {
        const double mid = f((prev_x + x) / 2.0);
        CHECK(mid >= (prev_y + y) / 2.0 - 1e-12);  // concavity
      }
      prev_x = x;
      prev_y = y;
    }
  }
}
