#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "kccjet/dynamics.hpp"
#include "kccjet/kcc.hpp"
#include "kccjet/program.hpp"

namespace kccjet::dynamics {

using expr::Expr;
using expr::Program;
using expr::VarId;

namespace {

bool finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

// Outputs: F (n), then for the variational system dF/dx (n*n) and dF/dy (n*n).
Program compile_rhs(const SodeModel& m, bool variational) {
  std::vector<Expr> out = m.F;
  if (variational) {
    for (int i = 0; i < m.n; ++i)
      for (int j = 0; j < m.n; ++j) out.push_back(expr::diff(m.F[i], VarId::x(j + 1)));
    for (int i = 0; i < m.n; ++i)
      for (int j = 0; j < m.n; ++j) out.push_back(expr::diff(m.F[i], VarId::y(j + 1)));
  }
  return Program(out);
}

// State layout: x (n), y (n), and for the variational system xi (n), xi' (n).
class Rhs {
 public:
  Rhs(const SodeModel& m, bool variational)
      : n_(m.n), variational_(variational), program_(compile_rhs(m, variational)), vals_(program_.outputs()) {
    env_.x.resize(n_);
    env_.y.resize(n_);
  }

  void operator()(double t, const std::vector<double>& s, std::vector<double>& ds) {
    const std::size_t n = static_cast<std::size_t>(n_);
    env_.t = t;
    std::copy(s.begin(), s.begin() + n, env_.x.begin());
    std::copy(s.begin() + n, s.begin() + 2 * n, env_.y.begin());
    program_.run(env_, vals_);
    ds.resize(s.size());
    for (std::size_t i = 0; i < n; ++i) {
      ds[i] = s[n + i];
      ds[n + i] = -vals_[i];
    }
    if (!variational_) return;
    const double* Fx = vals_.data() + n;
    const double* Fy = Fx + n * n;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += Fx[i * n + j] * s[2 * n + j] + Fy[i * n + j] * s[3 * n + j];
      ds[2 * n + i] = s[3 * n + i];
      ds[3 * n + i] = -acc;
    }
  }

 private:
  int n_;
  bool variational_;
  Program program_;
  std::vector<double> vals_;
  expr::Env env_;
};

JetPoint to_point(double t, const std::vector<double>& s, int n) {
  JetPoint p;
  p.t = t;
  p.x.assign(s.begin(), s.begin() + n);
  p.y.assign(s.begin() + n, s.begin() + 2 * n);
  return p;
}

// Classical RK4 from state s at t over `steps` steps of size h; calls
// record(k, t_k, s_k) for k = 0..steps.
template <class Record>
void rk4(Rhs& f, double t0, double h, int steps, std::vector<double> s, int n, Record&& record) {
  const std::size_t dim = s.size();
  std::vector<double> k1, k2, k3, k4, tmp(dim);
  record(0, t0, s);
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * h;
    try {
      f(t, s, k1);
      for (std::size_t i = 0; i < dim; ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
      f(t + 0.5 * h, tmp, k2);
      for (std::size_t i = 0; i < dim; ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
      f(t + 0.5 * h, tmp, k3);
      for (std::size_t i = 0; i < dim; ++i) tmp[i] = s[i] + h * k3[i];
      f(t + h, tmp, k4);
    } catch (const expr::EvalError& e) {
      throw IntegrationError(std::string("evaluation failed at t=") + std::to_string(t) + ": " + e.what(), t,
                             to_point(t, s, n));
    }
    std::vector<double> next(dim);
    for (std::size_t i = 0; i < dim; ++i) next[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!finite(next))
      throw IntegrationError("state became non-finite after t=" + std::to_string(t), t, to_point(t, s, n));
    s = std::move(next);
    // the last sample lands on t1 exactly
    record(k + 1, k + 1 == steps ? t0 + steps * h : t + h, s);
  }
}

}  // namespace

Trajectory integrate_trajectory(const SodeModel& m, const JetPoint& p0, double t1, int steps) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (p0.dim() != m.n || static_cast<int>(p0.y.size()) != m.n)
    throw std::invalid_argument("initial point dimension does not match the model");
  if (!(t1 != p0.t) || !std::isfinite(t1)) throw std::invalid_argument("t1 must be finite and differ from t0");
  Rhs f(m, false);
  std::vector<double> s = p0.x;
  s.insert(s.end(), p0.y.begin(), p0.y.end());
  Trajectory traj;
  traj.step = (t1 - p0.t) / steps;
  traj.samples.reserve(static_cast<std::size_t>(steps) + 1);
  rk4(f, p0.t, traj.step, steps, std::move(s), m.n, [&](int k, double t, const std::vector<double>& st) {
    JetPoint p = to_point(t, st, m.n);
    if (k == steps) p.t = t1;
    traj.samples.push_back(std::move(p));
  });
  return traj;
}

DeviationTrack integrate_deviation(const SodeModel& m, const Trajectory& traj, const std::vector<double>& xi0,
                                   const std::vector<double>& xidot0) {
  if (traj.samples.empty()) throw std::invalid_argument("trajectory is empty");
  if (static_cast<int>(xi0.size()) != m.n || static_cast<int>(xidot0.size()) != m.n)
    throw std::invalid_argument("deviation initial data must have n components");
  const JetPoint& p0 = traj.samples.front();
  const int steps = static_cast<int>(traj.samples.size()) - 1;
  const std::size_t n = static_cast<std::size_t>(m.n);
  DeviationTrack track;
  track.samples.reserve(traj.samples.size());
  if (steps == 0) {
    track.samples.push_back({p0.t, xi0, xidot0});
    return track;
  }
  Rhs f(m, true);
  std::vector<double> s = p0.x;
  s.insert(s.end(), p0.y.begin(), p0.y.end());
  s.insert(s.end(), xi0.begin(), xi0.end());
  s.insert(s.end(), xidot0.begin(), xidot0.end());
  rk4(f, p0.t, traj.step, steps, std::move(s), m.n, [&](int k, double, const std::vector<double>& st) {
    DeviationSample d;
    d.t = traj.samples[static_cast<std::size_t>(k)].t;
    d.xi.assign(st.begin() + 2 * n, st.begin() + 3 * n);
    d.xidot.assign(st.begin() + 3 * n, st.end());
    track.samples.push_back(std::move(d));
  });
  return track;
}

double deviation_residual(const SodeModel& m, const Trajectory& traj, const DeviationTrack& track) {
  const std::size_t count = traj.samples.size();
  if (track.samples.size() != count) throw std::invalid_argument("deviation track is not aligned with the trajectory");
  if (count < 5) throw std::invalid_argument("deviation_residual needs at least five samples");
  const int n = m.n;
  const std::size_t nn = static_cast<std::size_t>(n);

  // D xi/dt = xi' + N xi with N = (1/2) F_y + (1/2) H I (kind xi);
  // D/dt[V] = V' + K V with K = N - H I (kind T).
  const kcc::SemisprayDecomposition dec = kcc::decompose(m);
  const ExprTensor P = kcc::deviation_curvature(m);
  std::vector<Expr> out;
  for (const Expr& e : dec.N.data()) out.push_back(e);
  for (const Expr& e : dec.N.data()) out.push_back(kcc::total_derivative(e, m));
  out.push_back(dec.H);
  for (const Expr& e : P.data()) out.push_back(e);
  const Program program(out);

  const double h = traj.step;
  auto xidot = [&](std::size_t k, std::size_t i) { return track.samples[k].xidot[i]; };
  auto xiddot = [&](std::size_t k, std::size_t i) {
    if (k >= 2 && k + 2 < count)
      return (-xidot(k + 2, i) + 8 * xidot(k + 1, i) - 8 * xidot(k - 1, i) + xidot(k - 2, i)) / (12 * h);
    const bool head = k < 2;
    const double sgn = head ? 1.0 : -1.0;
    auto f = [&](std::size_t j) { return head ? xidot(j, i) : xidot(count - 1 - j, i); };
    const std::size_t off = head ? k : count - 1 - k;
    if (off == 0) return sgn * (-25 * f(0) + 48 * f(1) - 36 * f(2) + 16 * f(3) - 3 * f(4)) / (12 * h);
    return sgn * (-3 * f(0) - 10 * f(1) + 18 * f(2) - 6 * f(3) + f(4)) / (12 * h);
  };

  double worst = 0.0;
  std::vector<double> vals(program.outputs());
  for (std::size_t k = 0; k < count; ++k) {
    program.run(traj.samples[k], vals);
    const double* N = vals.data();
    const double* Nd = N + nn * nn;
    const double H = Nd[nn * nn];
    const double* Pm = Nd + nn * nn + 1;
    const auto& xi = track.samples[k].xi;
    std::vector<double> V(nn);
    for (std::size_t i = 0; i < nn; ++i) {
      V[i] = xidot(k, i);
      for (std::size_t j = 0; j < nn; ++j) V[i] += N[i * nn + j] * xi[j];
    }
    for (std::size_t i = 0; i < nn; ++i) {
      // V' = xi'' + N' xi + N xi'
      double dd = xiddot(k, i);
      for (std::size_t j = 0; j < nn; ++j) dd += Nd[i * nn + j] * xi[j] + N[i * nn + j] * xidot(k, j);
      for (std::size_t j = 0; j < nn; ++j) dd += (N[i * nn + j] - (i == j ? H : 0.0)) * V[j];
      double pxi = 0.0;
      for (std::size_t j = 0; j < nn; ++j) pxi += Pm[i * nn + j] * xi[j];
      worst = std::max(worst, std::abs(dd - pxi));
    }
  }
  return worst;
}

StabilityReport stability_report(const SodeModel& m, const JetPoint& p) {
  const ExprTensor P = kcc::deviation_curvature(m);
  const NumTensor v = evaluate(P, p);
  const int n = m.n;
  StabilityReport rep;
  rep.P.assign(n, std::vector<double>(n));
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = rep.P[i][j] = v(i, j);
  if (!A.allFinite()) throw expr::EvalError("deviation curvature is not finite at the point");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(A, false);
  for (int i = 0; i < n; ++i) rep.eigenvalues.push_back(solver.eigenvalues()[i]);
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return rep;
}

}  // namespace kccjet::dynamics
