#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kccjet/dynamics.hpp"
#include "models.hpp"
#include "support.hpp"

using namespace kccjet;
using namespace kccjet::dynamics;
using namespace kccjet::testing;
using expr::Env;

namespace {

constexpr double kPi = std::numbers::pi;

Env at(double t, std::vector<double> x, std::vector<double> y) { return Env{t, std::move(x), std::move(y)}; }

SodeModel exponential_model() { return rheonomic_model({"x1"}); }

Env equator() { return at(0.0, {kPi / 2, 0.0}, {0.0, 1.0}); }

}  // namespace

TEST_CASE("free motion is integrated exactly") {
  const SodeModel m = zero_model(2);
  const Trajectory tr = integrate_trajectory(m, at(0.0, {0.3, -1.2}, {0.7, 2.5}), 1.0, 7);
  REQUIRE(tr.samples.size() == 8);
  CHECK(tr.samples.back().t == 1.0);
  CHECK(std::abs(tr.samples.back().x[0] - 1.0) < 1e-12);
  CHECK(std::abs(tr.samples.back().x[1] - 1.3) < 1e-12);
  for (const auto& p : tr.samples) {
    CHECK(std::abs(p.x[0] - (0.3 + 0.7 * p.t)) < 1e-12);
    CHECK(std::abs(p.y[1] - 2.5) < 1e-12);
  }
  for (std::size_t k = 1; k < tr.samples.size(); ++k) CHECK(tr.samples[k].t > tr.samples[k - 1].t);
}

TEST_CASE("equatorial geodesic of the sphere") {
  const Trajectory tr = integrate_trajectory(sphere_model(), equator(), kPi, 1000);
  double drift = 0.0;
  for (const auto& p : tr.samples) drift = std::max(drift, std::abs(p.x[0] - kPi / 2));
  CHECK(drift < 1e-8);
  CHECK(std::abs(tr.samples.back().x[1] - kPi) < 1e-8);
}

TEST_CASE("exponential growth of the rheonomic model") {
  const Trajectory tr = integrate_trajectory(exponential_model(), at(0.0, {0.0}, {1.0}), 1.0, 1000);
  CHECK(std::abs(tr.samples.back().y[0] - std::exp(1.0)) < 1e-6);
  CHECK(std::abs(tr.samples.back().x[0] - (std::exp(1.0) - 1.0)) < 1e-6);
}

TEST_CASE("halving the step divides the error by about sixteen") {
  const SodeModel m = exponential_model();
  auto error = [&](int steps) {
    const Trajectory tr = integrate_trajectory(m, at(0.0, {0.0}, {1.0}), 1.0, steps);
    return std::abs(tr.samples.back().y[0] - std::exp(1.0));
  };
  for (int steps : {10, 20, 40}) {
    const double ratio = error(steps) / error(2 * steps);
    INFO("steps " << steps << " ratio " << ratio);
    CHECK(ratio > 14.0);
    CHECK(ratio < 18.0);
  }
}

TEST_CASE("y matches the numeric derivative of x") {
  const Trajectory tr = integrate_trajectory(generic_model(), at(0.5, {0.2, -0.4}, {0.3, 0.6}), 1.0, 400);
  const double h = tr.step;
  for (std::size_t k = 1; k + 1 < tr.samples.size(); ++k)
    for (int i = 0; i < 2; ++i) {
      const double dx = (tr.samples[k + 1].x[i] - tr.samples[k - 1].x[i]) / (2 * h);
      CHECK(std::abs(dx - tr.samples[k].y[i]) < 10 * h * h);
    }
}

TEST_CASE("integration errors report the failing time") {
  SUBCASE("evaluation failure") {
    // F = 1/(1 - t) cannot be evaluated at t = 1
    const SodeModel m = explicit_model({"1/(1 - t)"});
    try {
      integrate_trajectory(m, at(0.0, {0.0}, {0.0}), 2.0, 4);
      FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
      CHECK(e.time() == doctest::Approx(0.5));
      CHECK(e.last_good().t == doctest::Approx(0.5));
      CHECK(e.last_good().x.size() == 1);
    }
  }
  SUBCASE("blow-up") {
    // y' = 1e200 y^2 overflows within the first step
    const SodeModel m = explicit_model({"-y1^2*1e200"});
    CHECK_THROWS_AS(integrate_trajectory(m, at(0.0, {0.0}, {1.0}), 1.0, 2), IntegrationError);
  }
  CHECK_THROWS_AS(integrate_trajectory(zero_model(1), at(0.0, {0.0}, {0.0}), 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(integrate_trajectory(zero_model(2), at(0.0, {0.0}, {0.0}), 1.0, 3), std::invalid_argument);
}

TEST_CASE("deviation of free motion is affine") {
  const SodeModel m = zero_model(2);
  const Trajectory tr = integrate_trajectory(m, at(0.0, {0.0, 0.0}, {1.0, -1.0}), 2.0, 16);
  const DeviationTrack d = integrate_deviation(m, tr, {0.5, -0.25}, {1.5, 2.0});
  REQUIRE(d.samples.size() == tr.samples.size());
  for (std::size_t k = 0; k < d.samples.size(); ++k) {
    const double t = d.samples[k].t;
    CHECK(t == tr.samples[k].t);
    CHECK(std::abs(d.samples[k].xi[0] - (0.5 + 1.5 * t)) < 1e-12);
    CHECK(std::abs(d.samples[k].xi[1] - (-0.25 + 2.0 * t)) < 1e-12);
  }
  CHECK(deviation_residual(m, tr, d) < 1e-10);
}

TEST_CASE("Jacobi field along the equator is sin t") {
  const SodeModel m = sphere_model();
  const Trajectory tr = integrate_trajectory(m, equator(), kPi, 2000);
  const DeviationTrack d = integrate_deviation(m, tr, {0.0, 0.0}, {1.0, 0.0});
  double worst = 0.0;
  for (const auto& s : d.samples) worst = std::max(worst, std::abs(s.xi[0] - std::sin(s.t)));
  CHECK(worst < 1e-6);
  CHECK(deviation_residual(m, tr, d) < 1e-5);
}

TEST_CASE("rheonomic deviation grows like e^t") {
  const SodeModel m = exponential_model();
  const Trajectory tr = integrate_trajectory(m, at(0.0, {0.0}, {1.0}), 1.0, 1000);
  const DeviationTrack d = integrate_deviation(m, tr, {0.0}, {0.7});
  for (const auto& s : d.samples) CHECK(std::abs(s.xidot[0] - 0.7 * std::exp(s.t)) < 1e-9);
  CHECK(deviation_residual(m, tr, d) < 1e-7);
}

TEST_CASE("deviation residual shrinks under refinement") {
  const SodeModel m = generic_model();
  auto residual = [&](int steps) {
    const Trajectory tr = integrate_trajectory(m, at(0.5, {0.2, -0.4}, {0.3, 0.6}), 1.5, steps);
    const DeviationTrack d = integrate_deviation(m, tr, {0.1, 0.2}, {-0.3, 0.4});
    return deviation_residual(m, tr, d);
  };
  const double coarse = residual(50);
  const double fine = residual(200);
  INFO("coarse " << coarse << " fine " << fine);
  CHECK(fine < coarse / 10);
  CHECK(fine < 1e-5);
}

TEST_CASE("deviation matches perturbed trajectories") {
  // xi(t) is the derivative of the solution family in the initial data.
  const SodeModel m = generic_model();
  const Env p0 = at(0.5, {0.2, -0.4}, {0.3, 0.6});
  const std::vector<double> xi0{0.1, 0.2}, xidot0{-0.3, 0.4};
  const Trajectory tr = integrate_trajectory(m, p0, 1.5, 400);
  const DeviationTrack d = integrate_deviation(m, tr, xi0, xidot0);
  const double s = 1e-6;
  Env plus = p0, minus = p0;
  for (int i = 0; i < 2; ++i) {
    plus.x[i] += s * xi0[i];
    plus.y[i] += s * xidot0[i];
    minus.x[i] -= s * xi0[i];
    minus.y[i] -= s * xidot0[i];
  }
  const Trajectory a = integrate_trajectory(m, plus, 1.5, 400);
  const Trajectory b = integrate_trajectory(m, minus, 1.5, 400);
  for (std::size_t k = 0; k < tr.samples.size(); k += 40)
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs((a.samples[k].x[i] - b.samples[k].x[i]) / (2 * s) - d.samples[k].xi[i]) < 1e-6);
      CHECK(std::abs((a.samples[k].y[i] - b.samples[k].y[i]) / (2 * s) - d.samples[k].xidot[i]) < 1e-6);
    }
}

TEST_CASE("deviation argument checks") {
  const SodeModel m = zero_model(1);
  const Trajectory tr = integrate_trajectory(m, at(0.0, {0.0}, {1.0}), 1.0, 3);
  CHECK_THROWS_AS(integrate_deviation(m, tr, {0.0, 1.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(integrate_deviation(m, Trajectory{}, {0.0}, {0.0}), std::invalid_argument);
  const DeviationTrack d = integrate_deviation(m, tr, {0.0}, {1.0});
  // four samples are too few for the difference stencil
  CHECK_THROWS_AS(deviation_residual(m, tr, d), std::invalid_argument);
}

TEST_CASE("stability report examples") {
  const StabilityReport zero = stability_report(zero_model(2), at(0.0, {0.1, 0.2}, {0.3, 0.4}));
  for (const auto& row : zero.P)
    for (double v : row) CHECK(v == 0.0);
  for (const auto& e : zero.eigenvalues) CHECK(std::abs(e) < 1e-14);

  const StabilityReport rh = stability_report(exponential_model(), at(0.3, {0.5}, {2.0}));
  REQUIRE(rh.eigenvalues.size() == 1);
  CHECK(std::abs(rh.eigenvalues[0] - std::complex<double>(0.25, 0.0)) < 1e-12);

  const StabilityReport sph = stability_report(sphere_model(), at(0.0, {1.0, 0.0}, {1.0, 0.0}));
  REQUIRE(sph.eigenvalues.size() == 2);
  // P = -R y y has eigenvalues 0 and -1 for the unit tangent y = d/dx1
  CHECK(std::abs(sph.eigenvalues[0] - std::complex<double>(-1.0, 0.0)) < 1e-12);
  CHECK(std::abs(sph.eigenvalues[1]) < 1e-12);
  // eigenvalues are sorted by real part
  const StabilityReport g = stability_report(generic_model(), at(0.7, {0.2, 0.1}, {0.5, -0.3}));
  CHECK(g.eigenvalues[0].real() <= g.eigenvalues[1].real());
}
