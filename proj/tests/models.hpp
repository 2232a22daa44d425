#pragma once

// Model and coordinate-change fixtures shared by the unit and acceptance
// suites.

#include <string>
#include <vector>

#include "kccjet/geometry.hpp"

namespace kccjet::testing {

using geometry::CoordinateChange;
using geometry::InverseMap;
using geometry::SodeModel;
using geometry::SpatialMetric;
using geometry::TemporalMetric;

inline std::vector<expr::Expr> parse_all(const std::vector<std::string>& src, int n) {
  std::vector<expr::Expr> out;
  for (const auto& s : src) out.push_back(expr::parse(s, n));
  return out;
}

inline TemporalMetric metric_h(const std::string& h11, int n) { return TemporalMetric(expr::parse(h11, n)); }

inline SpatialMetric polar_metric() {
  return SpatialMetric({parse_all({"1", "0"}, 2), parse_all({"0", "x1^2"}, 2)});
}

inline SpatialMetric sphere_metric() {
  return SpatialMetric({parse_all({"1", "0"}, 2), parse_all({"0", "sin(x1)^2"}, 2)});
}

inline SodeModel zero_model(int n, const std::string& h11 = "1") {
  return SodeModel(n, metric_h(h11, n), std::vector<expr::Expr>(n, expr::Expr(0.0)));
}

inline SodeModel polar_model(const std::string& h11 = "1") {
  return geometry::sode_from_harmonic_curves(metric_h(h11, 2), polar_metric());
}

inline SodeModel sphere_model(const std::string& h11 = "1") {
  return geometry::sode_from_harmonic_curves(metric_h(h11, 2), sphere_metric());
}

inline SodeModel rheonomic_model(const std::vector<std::string>& X, const std::string& h11 = "1") {
  const int n = static_cast<int>(X.size());
  return geometry::sode_from_vectorfield(parse_all(X, n), metric_h(h11, n));
}

inline SodeModel explicit_model(const std::vector<std::string>& F, const std::string& h11 = "1") {
  const int n = static_cast<int>(F.size());
  return SodeModel(n, metric_h(h11, n), parse_all(F, n));
}

// A generic 2-dimensional model with t, x and cubic y dependence.
inline SodeModel generic_model() {
  return explicit_model({"x1*y2^2 - t*y1 + sin(x2)", "cos(t)*y1*y2 + x1*x2 + y2^3/3"}, "1 + t^2");
}

inline SodeModel connection_model(const std::string& h11 = "t^2") {
  return geometry::sode_from_connection(geometry::LinearConnection(geometry::christoffel_spatial(polar_metric())),
                                        metric_h(h11, 2));
}

inline CoordinateChange change(int n, const std::string& t_fwd, const std::string& t_inv,
                               const std::vector<std::string>& x_fwd, const std::vector<std::string>& x_inv) {
  auto inv = [&](const std::vector<std::string>& e) {
    return e.size() == 1 && e[0] == "newton" ? InverseMap::newton() : InverseMap::explicit_map(parse_all(e, n));
  };
  return CoordinateChange(n, expr::parse(t_fwd, n),
                          t_inv == "newton" ? InverseMap::newton() : InverseMap::explicit_map({expr::parse(t_inv, n)}),
                          parse_all(x_fwd, n), inv(x_inv));
}

inline CoordinateChange scale_x2(int n) {
  std::vector<std::string> f, b;
  for (int i = 1; i <= n; ++i) {
    f.push_back("2*x" + std::to_string(i));
    b.push_back("x" + std::to_string(i) + "/2");
  }
  return change(n, "t", "t", f, b);
}

inline CoordinateChange sine_newton(int n) {
  std::vector<std::string> f;
  for (int i = 1; i <= n; ++i) f.push_back("x" + std::to_string(i) + " + 0.1*sin(x" + std::to_string(i) + ")");
  return change(n, "t", "t", f, {"newton"});
}

inline CoordinateChange time_double(int n) {
  std::vector<std::string> x;
  for (int i = 1; i <= n; ++i) x.push_back("x" + std::to_string(i));
  return change(n, "2*t", "t/2", x, x);
}

}  // namespace kccjet::testing
