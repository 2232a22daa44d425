#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "kccjet/cli.hpp"

namespace kccjet::cli {

using expr::Expr;
using json = nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(origin + ": " + e.what());
  }
}

// Line of the first occurrence of the JSON string literal s, for messages.
int line_of(const std::string& text, const std::string& s) {
  const std::size_t at = text.find(json(s).dump());
  if (at == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n'));
}

// Parses expression strings of one file and attaches file/line/key context
// to failures.
class ExprReader {
 public:
  ExprReader(const std::string& text, const std::string& origin, int n) : text_(text), origin_(origin), n_(n) {}

  Expr scalar(const json& v, const std::string& key) const {
    if (!v.is_string()) fail(key, "expected an expression string");
    const std::string src = v.get<std::string>();
    try {
      return expr::parse(src, n_);
    } catch (const expr::ParseError& e) {
      const int line = line_of(text_, src);
      throw InputError(origin_ + (line ? ":" + std::to_string(line) : std::string()) + ": " + key + ": " + e.what());
    }
  }

  std::vector<Expr> list(const json& v, const std::string& key, std::size_t size) const {
    if (!v.is_array() || v.size() != size) fail(key, "expected an array of " + std::to_string(size) + " expressions");
    std::vector<Expr> out;
    for (std::size_t i = 0; i < size; ++i) out.push_back(scalar(v[i], key + "[" + std::to_string(i) + "]"));
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw InputError(origin_ + ": " + key + ": " + what);
  }

 private:
  const std::string& text_;
  const std::string& origin_;
  int n_;
};

Range read_range(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw InputError(where + ": expected [lo, hi]");
  const Range r{v[0].get<double>(), v[1].get<double>()};
  if (!std::isfinite(r.first) || !std::isfinite(r.second) || !(r.first <= r.second))
    throw InputError(where + ": need finite lo <= hi");
  return r;
}

std::vector<Range> read_ranges(const json& v, int n, const std::string& where) {
  if (v.is_array() && v.size() == 2 && v[0].is_number()) return std::vector<Range>(n, read_range(v, where));
  if (!v.is_array() || static_cast<int>(v.size()) != n)
    throw InputError(where + ": expected [lo, hi] or " + std::to_string(n) + " ranges");
  std::vector<Range> out;
  for (int i = 0; i < n; ++i) out.push_back(read_range(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

double constant_value(const std::string& src) {
  try {
    return expr::eval(expr::parse(src, 0), expr::Env{});
  } catch (const expr::ParseError& e) {
    throw InputError("'" + src + "': " + e.what());
  } catch (const expr::EvalError& e) {
    throw InputError("'" + src + "': " + e.what());
  }
}

// Splits on commas outside brackets and parentheses.
std::vector<std::string> split_top(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  int depth = 0;
  for (char ch : s) {
    if (ch == '[' || ch == '(') ++depth;
    if (ch == ']' || ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\n\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\n\r") - b + 1);
}

}  // namespace

Domain Domain::standard(int n) {
  Domain d;
  d.x.assign(n, {-1.0, 1.0});
  d.y.assign(n, {-1.0, 1.0});
  return d;
}

ModelFile parse_model(const std::string& text, const std::string& origin) {
  const json j = parse_json(text, origin);
  if (!j.is_object()) throw InputError(origin + ": expected a JSON object");
  if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<int>() < 1)
    throw InputError(origin + ": \"dim\" must be a positive integer");
  const int n = j["dim"].get<int>();
  const std::size_t un = static_cast<std::size_t>(n);
  const ExprReader rd(text, origin, n);

  std::vector<std::string> kinds;
  for (const char* k : {"F", "phi", "X", "gamma"})
    if (j.contains(k)) kinds.emplace_back(k);
  if (kinds.size() != 1) throw InputError(origin + ": exactly one of \"F\", \"phi\", \"X\", \"gamma\" is required");

  ModelFile mf;
  mf.path = origin;
  mf.kind = kinds[0];
  if (!j.contains("h11")) throw InputError(origin + ": \"h11\" is required");
  const Expr h11 = rd.scalar(j["h11"], "h11");

  try {
    const geometry::TemporalMetric h(h11);
    if (mf.kind == "F") {
      mf.model = geometry::SodeModel(n, h, rd.list(j["F"], "F", un));
    } else if (mf.kind == "X") {
      mf.model = geometry::sode_from_vectorfield(rd.list(j["X"], "X", un), h);
    } else if (mf.kind == "phi") {
      const json& v = j["phi"];
      if (!v.is_array() || v.size() != un) rd.fail("phi", "expected an n x n array");
      std::vector<std::vector<Expr>> phi;
      for (std::size_t i = 0; i < un; ++i) phi.push_back(rd.list(v[i], "phi[" + std::to_string(i) + "]", un));
      mf.model = geometry::sode_from_harmonic_curves(h, geometry::SpatialMetric(std::move(phi)));
    } else {
      const json& v = j["gamma"];
      if (!v.is_array() || v.size() != un) rd.fail("gamma", "expected an n x n x n array");
      ExprTensor g = ExprTensor::cube(3, un);
      for (std::size_t i = 0; i < un; ++i) {
        if (!v[i].is_array() || v[i].size() != un) rd.fail("gamma", "expected an n x n x n array");
        for (std::size_t a = 0; a < un; ++a) {
          const auto row = rd.list(v[i][a], "gamma[" + std::to_string(i) + "][" + std::to_string(a) + "]", un);
          for (std::size_t b = 0; b < un; ++b) g(i, a, b) = row[b];
        }
      }
      mf.model = geometry::sode_from_connection(geometry::LinearConnection(std::move(g)), h);
    }
  } catch (const std::logic_error& e) {
    throw InputError(origin + ": " + e.what());
  }

  mf.domain = Domain::standard(n);
  if (j.contains("domain")) {
    const json& d = j["domain"];
    if (!d.is_object()) throw InputError(origin + ": \"domain\" must be an object");
    if (d.contains("t")) mf.domain.t = read_range(d["t"], origin + ": domain.t");
    if (d.contains("x")) mf.domain.x = read_ranges(d["x"], n, origin + ": domain.x");
    if (d.contains("y")) mf.domain.y = read_ranges(d["y"], n, origin + ": domain.y");
  }
  return mf;
}

ModelFile load_model(const std::string& path) { return parse_model(read_file(path), path); }

ChangeFile parse_change(const std::string& text, const std::string& origin, int n) {
  const json j = parse_json(text, origin);
  if (!j.is_object()) throw InputError(origin + ": expected a JSON object");
  const std::size_t un = static_cast<std::size_t>(n);
  const ExprReader rd(text, origin, n);
  auto is_newton = [&](const char* key) {
    return !j.contains(key) || (j[key].is_string() && j[key].get<std::string>() == "newton");
  };
  const Expr t_fwd = j.contains("t_fwd") ? rd.scalar(j["t_fwd"], "t_fwd") : Expr::var(expr::VarId::time());
  std::vector<Expr> x_fwd;
  if (j.contains("x_fwd")) {
    x_fwd = rd.list(j["x_fwd"], "x_fwd", un);
  } else {
    for (int i = 1; i <= n; ++i) x_fwd.push_back(Expr::var(expr::VarId::x(i)));
  }
  // An identity map needs no inverse from the file.
  const geometry::InverseMap t_inv =
      !j.contains("t_fwd") ? geometry::InverseMap::explicit_map({t_fwd})
      : is_newton("t_inv") ? geometry::InverseMap::newton()
                           : geometry::InverseMap::explicit_map({rd.scalar(j["t_inv"], "t_inv")});
  const geometry::InverseMap x_inv = !j.contains("x_fwd") ? geometry::InverseMap::explicit_map(x_fwd)
                                     : is_newton("x_inv") ? geometry::InverseMap::newton()
                                                          : geometry::InverseMap::explicit_map(rd.list(j["x_inv"], "x_inv", un));
  try {
    return {origin, geometry::CoordinateChange(n, t_fwd, t_inv, x_fwd, x_inv)};
  } catch (const std::logic_error& e) {
    throw InputError(origin + ": " + e.what());
  }
}

ChangeFile load_change(const std::string& path, int n) { return parse_change(read_file(path), path, n); }

double parse_constant(const std::string& text) { return constant_value(trim(text)); }

std::vector<double> parse_vector(const std::string& text, int n) {
  std::string body = trim(text);
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') throw InputError("unbalanced brackets in '" + text + "'");
    body = body.substr(1, body.size() - 2);
  }
  std::vector<double> out;
  if (!trim(body).empty())
    for (const auto& part : split_top(body)) out.push_back(constant_value(trim(part)));
  if (static_cast<int>(out.size()) != n)
    throw InputError("expected " + std::to_string(n) + " components in '" + text + "', got " +
                     std::to_string(out.size()));
  return out;
}

geometry::JetPoint parse_point(const std::string& text, int n) {
  geometry::JetPoint p;
  bool has_t = false, has_x = false, has_y = false;
  for (const auto& raw : split_top(text)) {
    const std::string part = trim(raw);
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw InputError("point entry '" + part + "' is not key=value");
    const std::string key = trim(part.substr(0, eq));
    const std::string value = part.substr(eq + 1);
    if (key == "t" && !has_t) {
      p.t = constant_value(trim(value));
      has_t = true;
    } else if (key == "x" && !has_x) {
      p.x = parse_vector(value, n);
      has_x = true;
    } else if (key == "y" && !has_y) {
      p.y = parse_vector(value, n);
      has_y = true;
    } else {
      throw InputError("unexpected or repeated point key '" + key + "'");
    }
  }
  if (!has_x || !has_y) throw InputError("point needs x=[..] and y=[..]");
  return p;  // t defaults to 0
}

std::vector<geometry::JetPoint> sample_domain(const Domain& d, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  // 53 random bits mapped to [0, 1); identical across standard libraries
  auto draw = [&](const Range& r) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return r.first + (r.second - r.first) * u;
  };
  std::vector<geometry::JetPoint> pts(count);
  for (auto& p : pts) {
    p.t = draw(d.t);
    for (const auto& r : d.x) p.x.push_back(draw(r));
    for (const auto& r : d.y) p.y.push_back(draw(r));
  }
  return pts;
}

Format parse_format(const std::string& name) {
  if (name == "json") return Format::Json;
  if (name == "csv") return Format::Csv;
  if (name == "text") return Format::Text;
  throw InputError("unknown format '" + name + "'");
}

}  // namespace kccjet::cli
