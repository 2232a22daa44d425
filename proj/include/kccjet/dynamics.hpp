#pragma once

// Fixed-step RK4 integration of a SODE (as dx/dt = y, dy/dt = -F) and of
// its variational equations along a trajectory, plus the pointwise check of
// the covariant Jacobi form D/dt[D xi/dt] = P xi.

#include <complex>
#include <stdexcept>
#include <vector>

#include "kccjet/geometry.hpp"

namespace kccjet::dynamics {

using geometry::JetPoint;
using geometry::SodeModel;

struct Trajectory {
  double step = 0.0;
  std::vector<JetPoint> samples;  // steps + 1 points, uniform in t
};

struct DeviationSample {
  double t = 0.0;
  std::vector<double> xi;
  std::vector<double> xidot;
};

struct DeviationTrack {
  std::vector<DeviationSample> samples;  // aligned with the carrier trajectory
};

// Raised when the right-hand side cannot be evaluated or the state stops
// being finite. last_good is the state at the start of the failing step.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time, JetPoint last_good)
      : std::runtime_error(what), time_(time), last_good_(std::move(last_good)) {}
  double time() const { return time_; }
  const JetPoint& last_good() const { return last_good_; }

 private:
  double time_;
  JetPoint last_good_;
};

Trajectory integrate_trajectory(const SodeModel& m, const JetPoint& p0, double t1, int steps);

// Integrates (x, y, xi, xi') jointly on the carrier's grid, so the variational
// coefficients are taken at exactly the RK4 stage states of the trajectory.
DeviationTrack integrate_deviation(const SodeModel& m, const Trajectory& traj, const std::vector<double>& xi0,
                                   const std::vector<double>& xidot0);

// max over samples and components of |D/dt[D xi/dt] - P xi|, with the outer
// derivative of kind T and xi'' estimated by fourth-order differences of the
// integrated xi'. Needs at least five samples.
double deviation_residual(const SodeModel& m, const Trajectory& traj, const DeviationTrack& track);

struct StabilityReport {
  std::vector<std::vector<double>> P;
  std::vector<std::complex<double>> eigenvalues;  // sorted by real part, then imaginary part
};

StabilityReport stability_report(const SodeModel& m, const JetPoint& p);

}  // namespace kccjet::dynamics
