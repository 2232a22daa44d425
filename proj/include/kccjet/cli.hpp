#pragma once

// Command layer behind the kccjet executable: model and change files,
// point syntax, sampling boxes, and the five commands. Commands write their
// report to `out`, diagnostics to `err`, and return the process exit code.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kccjet/geometry.hpp"

namespace kccjet::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kRuntimeError = 2, kUsageError = 3 };

// Bad input: unreadable or malformed files, bad flags, bad point syntax.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Range = std::pair<double, double>;

// Sampling box for property checks; one range per component.
struct Domain {
  Range t{0.5, 1.5};
  std::vector<Range> x;
  std::vector<Range> y;

  static Domain standard(int n);
};

struct ModelFile {
  std::string path;
  geometry::SodeModel model;
  std::string kind;  // "F", "phi", "X" or "gamma"
  Domain domain;
};

struct ChangeFile {
  std::string path;
  geometry::CoordinateChange change;
};

// Schema: {"dim": n, "h11": expr, one of "F" | "phi" | "X" | "gamma",
// optional "domain": {"t": [lo, hi], "x": [lo, hi] or n pairs, "y": ...}}.
ModelFile load_model(const std::string& path);
ModelFile parse_model(const std::string& text, const std::string& origin);

// Schema: {"t_fwd": expr, "t_inv": expr, "x_fwd": [n], "x_inv": [n]}. An
// inverse given as "newton", or left out, is solved numerically.
ChangeFile load_change(const std::string& path, int n);
ChangeFile parse_change(const std::string& text, const std::string& origin, int n);

// "t=0.5,x=[1,2],y=[0,pi/2]"; entries are constant expressions.
geometry::JetPoint parse_point(const std::string& text, int n);
// A constant expression such as "pi/2".
double parse_constant(const std::string& text);
// "[1, 0.5]" or "1, 0.5"
std::vector<double> parse_vector(const std::string& text, int n);

// Uniform points in the box from a seeded 64-bit Mersenne Twister, drawn
// as t, x1..xn, y1..yn per point.
std::vector<geometry::JetPoint> sample_domain(const Domain& d, std::size_t count, std::uint64_t seed);

enum class Format { Text, Json, Csv };
Format parse_format(const std::string& name);

struct InvariantsOptions {
  std::string model;
  std::string at;
  bool symbolic = false;
  Format format = Format::Json;
};

struct TrajectoryOptions {
  std::string model;
  std::string at;
  double t1 = 1.0;
  int steps = 100;
  std::string out;  // "-" writes the CSV to the output stream
};

struct DeviationOptions {
  TrajectoryOptions run;
  std::string xi;
  std::string xidot;
};

struct CovarianceOptions {
  std::string model;
  std::string change;
  int points = 8;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  Format format = Format::Text;
};

struct FlatnessOptions {
  std::string model;
  int points = 64;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  Format format = Format::Text;
};

int cmd_invariants(const InvariantsOptions& o, std::ostream& out, std::ostream& err);
int cmd_trajectory(const TrajectoryOptions& o, std::ostream& out, std::ostream& err);
int cmd_deviation(const DeviationOptions& o, std::ostream& out, std::ostream& err);
int cmd_covariance(const CovarianceOptions& o, std::ostream& out, std::ostream& err);
int cmd_flatness(const FlatnessOptions& o, std::ostream& out, std::ostream& err);

// Number formatting shared by the reports.
std::string json_number(double v);  // %.17g
std::string csv_number(double v);   // %.12g

}  // namespace kccjet::cli
