#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>

#include "json.hpp"

#include "kccjet/cli.hpp"
#include "kccjet/dynamics.hpp"
#include "kccjet/kcc.hpp"
#include "kccjet/program.hpp"

namespace kccjet::cli {

using expr::Expr;
using ojson = nlohmann::ordered_json;

namespace {

std::string format_number(const char* fmt, double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  if (v == 0.0) v = 0.0;  // no "-0" in reports
  char buf[40];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

// nlohmann prints the shortest round-trip form; reports pin 17 digits, so
// numbers are written here and everything else is delegated.
void write_json(std::ostream& os, const ojson& j, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  if (j.is_number_float()) {
    const double v = j.get<double>();
    os << (std::isfinite(v) ? json_number(v) : "null");
  } else if (j.is_array()) {
    // arrays of numbers stay on one line
    bool flat = true;
    for (const auto& e : j) flat = flat && !e.is_structured();
    if (j.empty()) {
      os << "[]";
      return;
    }
    os << '[';
    for (std::size_t i = 0; i < j.size(); ++i) {
      os << (i ? (flat ? ", " : ",\n" + pad) : (flat ? "" : "\n" + pad));
      write_json(os, j[i], indent + 2);
    }
    os << (flat ? "]" : "\n" + close + "]");
  } else if (j.is_object()) {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    bool first = true;
    for (const auto& [k, v] : j.items()) {
      if (!first) os << ",\n";
      first = false;
      os << pad << ojson(k).dump() << ": ";
      write_json(os, v, indent + 2);
    }
    os << '\n' << close << '}';
  } else {
    os << j.dump();
  }
}

ojson nested(const std::vector<double>& flat, const std::vector<std::size_t>& shape, std::size_t axis,
             std::size_t& k) {
  ojson arr = ojson::array();
  for (std::size_t i = 0; i < shape[axis]; ++i) {
    if (axis + 1 == shape.size())
      arr.push_back(flat[k++]);
    else
      arr.push_back(nested(flat, shape, axis + 1, k));
  }
  return arr;
}

ojson nested(const std::vector<double>& flat, const std::vector<std::size_t>& shape) {
  std::size_t k = 0;
  return nested(flat, shape, 0, k);
}

ojson nested_strings(const std::vector<Expr>& flat, const std::vector<std::size_t>& shape, std::size_t axis,
                     std::size_t& k) {
  ojson arr = ojson::array();
  for (std::size_t i = 0; i < shape[axis]; ++i) {
    if (axis + 1 == shape.size())
      arr.push_back(expr::print(flat[k++]));
    else
      arr.push_back(nested_strings(flat, shape, axis + 1, k));
  }
  return arr;
}

std::string index_label(const std::vector<std::size_t>& idx) {
  std::string s;
  for (std::size_t i : idx) s += "[" + std::to_string(i) + "]";
  return s;
}

ojson point_json(const geometry::JetPoint& p) {
  return ojson{{"t", p.t}, {"x", p.x}, {"y", p.y}};
}

std::string vector_text(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number("%.12g", v[i]);
  return s + "]";
}

// Maps exceptions to exit codes; commands only handle what they report
// specially.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const expr::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

void check_point(const geometry::SodeModel& m, const geometry::JetPoint& p) { m.h.check_at(p.t); }

void check_run(const TrajectoryOptions& o, const geometry::JetPoint& p0) {
  if (o.steps < 1) throw InputError("--steps must be >= 1");
  if (!std::isfinite(o.t1) || o.t1 == p0.t) throw InputError("--t1 must be finite and differ from the start time");
}

class CsvSink {
 public:
  explicit CsvSink(const std::string& path, std::ostream& fallback) {
    if (path == "-") {
      os_ = &fallback;
      return;
    }
    file_.open(path);
    if (!file_) throw InputError(path + ": cannot open for writing");
    os_ = &file_;
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_ = nullptr;
};

void csv_header(std::ostream& os, int n, bool deviation) {
  os << 't';
  for (const char* v : {"x", "y"})
    for (int i = 1; i <= n; ++i) os << ',' << v << i;
  if (deviation)
    for (const char* v : {"xi", "xidot"})
      for (int i = 1; i <= n; ++i) os << ',' << v << i;
  os << '\n';
}

void csv_row(std::ostream& os, const geometry::JetPoint& p, const dynamics::DeviationSample* d) {
  os << csv_number(p.t);
  for (double v : p.x) os << ',' << csv_number(v);
  for (double v : p.y) os << ',' << csv_number(v);
  if (d) {
    for (double v : d->xi) os << ',' << csv_number(v);
    for (double v : d->xidot) os << ',' << csv_number(v);
  }
  os << '\n';
}

int report_abort(const dynamics::IntegrationError& e, std::ostream& err) {
  err << "error: integration aborted: " << e.what() << "; last good time t=" << json_number(e.last_good().t) << '\n';
  return kRuntimeError;
}

}  // namespace

std::string json_number(double v) { return format_number("%.17g", v); }
std::string csv_number(double v) { return format_number("%.12g", v); }

int cmd_invariants(const InvariantsOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.format == Format::Text) throw InputError("invariants supports --format json or csv");
    const ModelFile mf = load_model(o.model);
    const int n = mf.model.n;
    const geometry::JetPoint p = parse_point(o.at, n);
    check_point(mf.model, p);
    const kcc::InvariantSet inv = kcc::all_invariants(mf.model);

    std::vector<ExprTensor> parts;
    std::vector<Expr> all;
    for (kcc::Invariant w : kcc::kAllInvariants) {
      parts.push_back(kcc::invariant_components(inv, w));
      all.insert(all.end(), parts.back().data().begin(), parts.back().data().end());
    }
    std::vector<double> values;
    try {
      values = expr::Program(all).run(p);
    } catch (const expr::EvalError&) {
      // find the first failing component for the message
      for (std::size_t w = 0; w < parts.size(); ++w)
        for (std::size_t k = 0; k < parts[w].size(); ++k) {
          try {
            expr::eval(parts[w].data()[k], p);
          } catch (const expr::EvalError& e) {
            err << "error: evaluation of " << kcc::invariant_name(kcc::kAllInvariants[w])
                << index_label(parts[w].unravel(k)) << " failed: " << e.what() << '\n';
            return int{kRuntimeError};
          }
        }
      throw;
    }

    if (o.format == Format::Csv) {
      out << "invariant,index,value" << (o.symbolic ? ",expr" : "") << '\n';
      std::size_t off = 0;
      for (std::size_t w = 0; w < parts.size(); ++w)
        for (std::size_t k = 0; k < parts[w].size(); ++k, ++off) {
          out << kcc::invariant_name(kcc::kAllInvariants[w]) << ',' << index_label(parts[w].unravel(k)) << ','
              << csv_number(values[off]);
          if (o.symbolic) out << ",\"" << expr::print(parts[w].data()[k]) << '"';
          out << '\n';
        }
      return int{kOk};
    }

    ojson doc;
    doc["model"] = mf.path;
    doc["kind"] = mf.kind;
    doc["dim"] = n;
    doc["point"] = point_json(p);
    ojson numeric, symbolic;
    std::size_t off = 0;
    for (std::size_t w = 0; w < parts.size(); ++w) {
      const std::string name(kcc::invariant_name(kcc::kAllInvariants[w]));
      const std::vector<double> flat(values.begin() + static_cast<std::ptrdiff_t>(off),
                                     values.begin() + static_cast<std::ptrdiff_t>(off + parts[w].size()));
      off += parts[w].size();
      numeric[name] = nested(flat, parts[w].shape());
      std::size_t k = 0;
      if (o.symbolic) symbolic[name] = nested_strings(parts[w].data(), parts[w].shape(), 0, k);
    }
    doc["invariants"] = numeric;
    if (o.symbolic) doc["symbolic"] = symbolic;
    write_json(out, doc);
    out << '\n';
    return int{kOk};
  });
}

int cmd_trajectory(const TrajectoryOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ModelFile mf = load_model(o.model);
    const geometry::JetPoint p0 = parse_point(o.at, mf.model.n);
    check_run(o, p0);
    dynamics::Trajectory tr;
    try {
      tr = dynamics::integrate_trajectory(mf.model, p0, o.t1, o.steps);
    } catch (const dynamics::IntegrationError& e) {
      return report_abort(e, err);
    }
    CsvSink sink(o.out, out);
    csv_header(sink.stream(), mf.model.n, false);
    for (const auto& p : tr.samples) csv_row(sink.stream(), p, nullptr);
    if (o.out != "-") {
      const auto& last = tr.samples.back();
      out << "wrote " << tr.samples.size() << " rows to " << o.out << '\n'
          << "final t=" << csv_number(last.t) << " x=" << vector_text(last.x) << " y=" << vector_text(last.y) << '\n';
    }
    return int{kOk};
  });
}

int cmd_deviation(const DeviationOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ModelFile mf = load_model(o.run.model);
    const int n = mf.model.n;
    const geometry::JetPoint p0 = parse_point(o.run.at, n);
    check_run(o.run, p0);
    const std::vector<double> xi0 = parse_vector(o.xi, n);
    const std::vector<double> xidot0 = parse_vector(o.xidot, n);
    dynamics::Trajectory tr;
    dynamics::DeviationTrack dv;
    try {
      tr = dynamics::integrate_trajectory(mf.model, p0, o.run.t1, o.run.steps);
      dv = dynamics::integrate_deviation(mf.model, tr, xi0, xidot0);
    } catch (const dynamics::IntegrationError& e) {
      return report_abort(e, err);
    }
    CsvSink sink(o.run.out, out);
    csv_header(sink.stream(), n, true);
    for (std::size_t k = 0; k < tr.samples.size(); ++k) csv_row(sink.stream(), tr.samples[k], &dv.samples[k]);

    // with the CSV on stdout the summary goes to stderr
    std::ostream& summary = o.run.out == "-" ? err : out;
    if (o.run.out != "-") summary << "wrote " << tr.samples.size() << " rows to " << o.run.out << '\n';
    const auto& last = dv.samples.back();
    summary << "final xi=" << vector_text(last.xi) << " xidot=" << vector_text(last.xidot) << '\n';
    if (tr.samples.size() >= 5)
      summary << "deviation_residual " << json_number(dynamics::deviation_residual(mf.model, tr, dv)) << '\n';
    else
      summary << "deviation_residual n/a (needs at least 5 samples)\n";
    return int{kOk};
  });
}

int cmd_covariance(const CovarianceOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.points < 1) throw InputError("--points must be >= 1");
    if (o.format == Format::Csv) throw InputError("covariance supports --format text or json");
    const ModelFile mf = load_model(o.model);
    const ChangeFile cf = load_change(o.change, mf.model.n);
    const auto pts = sample_domain(mf.domain, static_cast<std::size_t>(o.points), o.seed);
    const kcc::CovarianceReport rep = kcc::covariance_check(mf.model, cf.change, pts);

    bool pass = rep.points_used > 0;
    for (double d : rep.discrepancy) pass = pass && d < o.tol;
    const int code = rep.points_used == 0 ? kRuntimeError : (pass ? kOk : kCheckFailed);

    if (o.format == Format::Json) {
      ojson doc;
      doc["model"] = mf.path;
      doc["change"] = cf.path;
      doc["seed"] = o.seed;
      doc["points"] = o.points;
      doc["points_used"] = rep.points_used;
      ojson disc;
      for (std::size_t k = 0; k < 5; ++k) disc[std::string(kcc::invariant_name(kcc::kAllInvariants[k]))] = rep.discrepancy[k];
      doc["discrepancy"] = disc;
      ojson skipped = ojson::array();
      for (const auto& f : rep.failures) skipped.push_back({{"index", f.index}, {"reason", f.message}});
      doc["skipped"] = skipped;
      doc["tolerance"] = o.tol;
      doc["pass"] = pass;
      write_json(out, doc);
      out << '\n';
    } else {
      out << "model " << mf.path << "\nchange " << cf.path << '\n'
          << "points " << rep.points_used << " used, " << rep.failures.size() << " skipped (seed " << o.seed << ")\n";
      for (const auto& f : rep.failures) out << "  skipped #" << f.index << ": " << f.message << '\n';
      for (std::size_t k = 0; k < 5; ++k)
        out << "  " << kcc::invariant_name(kcc::kAllInvariants[k]) << " discrepancy " << json_number(rep.discrepancy[k])
            << '\n';
      out << (pass ? "PASS" : "FAIL") << " (tol " << format_number("%g", o.tol) << ")\n";
    }
    if (rep.points_used == 0) err << "error: no sample point could be used\n";
    return code;
  });
}

int cmd_flatness(const FlatnessOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.points < 1) throw InputError("--points must be >= 1");
    if (o.format == Format::Csv) throw InputError("flatness supports --format text or json");
    const ModelFile mf = load_model(o.model);
    const int n = mf.model.n;
    const auto pts = sample_domain(mf.domain, static_cast<std::size_t>(o.points), o.seed);
    const kcc::FlatnessReport rep = kcc::flatness_check(mf.model, pts, o.tol);
    const bool flat = rep.vanish && rep.connection_flat;

    // nonzero Gamma^i_jk with j <= k, 1-based
    std::vector<std::pair<std::string, std::string>> gamma;
    if (rep.gamma)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = j; k < n; ++k) {
            const Expr& g = (*rep.gamma)(i, j, k);
            if (g.is_const(0.0)) continue;
            gamma.emplace_back("Gamma^" + std::to_string(i + 1) + "_" + std::to_string(j + 1) + std::to_string(k + 1),
                               expr::print(g));
          }

    if (o.format == Format::Json) {
      ojson doc;
      doc["model"] = mf.path;
      doc["verdict"] = flat ? "FLAT" : "NOT FLAT";
      ojson maxima;
      for (std::size_t k = 0; k < 5; ++k) maxima[std::string(kcc::invariant_name(kcc::kAllInvariants[k]))] = rep.invariant_max[k];
      doc["invariant_max"] = maxima;
      doc["invariants_vanish"] = rep.vanish;
      if (rep.gamma) {
        ojson g = ojson::object();
        for (const auto& [k, v] : gamma) g[k] = v;
        doc["gamma"] = g;
      } else {
        doc["gamma"] = nullptr;
      }
      doc["curvature_max"] = rep.curvature_max;
      doc["connection_flat"] = rep.connection_flat;
      doc["consistent"] = rep.consistent;
      doc["samples_used"] = rep.samples_used;
      doc["samples_skipped"] = rep.failures.size();
      write_json(out, doc);
      out << '\n';
    } else {
      out << (flat ? "FLAT" : "NOT FLAT") << '\n' << "model " << mf.path << '\n';
      out << "samples " << rep.samples_used << " used, " << rep.failures.size() << " skipped\n";
      for (std::size_t k = 0; k < 5; ++k)
        out << "  max |" << kcc::invariant_name(kcc::kAllInvariants[k]) << "| " << json_number(rep.invariant_max[k])
            << '\n';
      if (rep.gamma) {
        out << "reconstructed connection:" << (gamma.empty() ? " all components zero" : "") << '\n';
        for (const auto& [k, v] : gamma) out << "  " << k << " = " << v << '\n';
      } else {
        out << "no connection of the form F = Gamma y y - H y\n";
      }
      out << "curvature_max " << json_number(rep.curvature_max) << '\n';
      if (!rep.consistent) out << "INCONSISTENT: invariants and connection disagree\n";
    }
    return rep.consistent ? int{kOk} : int{kCheckFailed};
  });
}

}  // namespace kccjet::cli
