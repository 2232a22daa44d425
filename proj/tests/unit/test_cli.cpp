#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "kccjet/cli.hpp"

using namespace kccjet;
using namespace kccjet::cli;
using nlohmann::json;

namespace {

std::string model(const std::string& name) { return std::string(KCCJET_MODELS_DIR) + "/" + name + ".json"; }

struct Run {
  int code = -1;
  std::string out, err;
};

template <class Opts, class Cmd>
Run run(Cmd cmd, const Opts& o) {
  std::ostringstream out, err;
  Run r;
  r.code = cmd(o, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

Run invariants(const std::string& m, const std::string& at, Format f = Format::Json, bool symbolic = false) {
  InvariantsOptions o;
  o.model = model(m);
  o.at = at;
  o.format = f;
  o.symbolic = symbolic;
  return run(cmd_invariants, o);
}

double max_abs(const json& j) {
  if (j.is_number()) return std::abs(j.get<double>());
  double m = 0.0;
  for (const auto& e : j) m = std::max(m, max_abs(e));
  return m;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<double> csv_fields(const std::string& line) {
  std::vector<double> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(std::stod(f));
  return out;
}

std::string temp_path(const std::string& name) { return std::string(KCCJET_TEST_TMP) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string p = temp_path(name);
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("number formats") {
  CHECK(json_number(0.1) == "0.10000000000000001");
  CHECK(csv_number(0.1) == "0.1");
  CHECK(json_number(-0.0) == "0");
  CHECK(std::stod(json_number(M_PI)) == M_PI);
}

TEST_CASE("point and vector syntax") {
  const geometry::JetPoint p = parse_point("t=0.5, x=[1, pi/2], y=[0,-2]", 2);
  CHECK(p.t == 0.5);
  CHECK(p.x[1] == doctest::Approx(M_PI / 2));
  CHECK(p.y[1] == -2.0);
  CHECK(parse_point("x=[1],y=[2]", 1).t == 0.0);
  CHECK(parse_vector("[sin(0), 2^3]", 2) == std::vector<double>{0.0, 8.0});
  CHECK(parse_vector("1, 2", 2) == std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(parse_point("x=[1,2],y=[1]", 2), InputError);
  CHECK_THROWS_AS(parse_point("t=1,x=[1]", 1), InputError);
  CHECK_THROWS_AS(parse_point("t=1,t=2,x=[1],y=[1]", 1), InputError);
  CHECK_THROWS_AS(parse_point("z=1,x=[1],y=[1]", 1), InputError);
  CHECK_THROWS_AS(parse_vector("[x1]", 1), InputError);
  CHECK_THROWS_AS(parse_vector("[1/0]", 1), InputError);
}

TEST_CASE("model files") {
  const ModelFile polar = load_model(model("polar"));
  CHECK(polar.kind == "phi");
  CHECK(polar.model.n == 2);
  CHECK(polar.domain.x[0] == Range{0.5, 2.0});
  CHECK(polar.domain.y[1] == Range{-1.0, 1.0});
  CHECK(polar.domain.t == Range{0.5, 1.5});

  const ModelFile conn = parse_model(
      R"({"dim": 2, "h11": "t^2", "gamma": [[["0","0"],["0","-x1"]], [["0","1/x1"],["1/x1","0"]]]})", "inline");
  CHECK(conn.kind == "gamma");
  CHECK(conn.domain.x.size() == 2);

  CHECK_THROWS_AS(parse_model(R"({"dim": 1, "h11": "1", "F": ["y1"], "X": ["x1"]})", "m"), InputError);
  CHECK_THROWS_AS(parse_model(R"({"dim": 1, "h11": "1"})", "m"), InputError);
  CHECK_THROWS_AS(parse_model(R"({"dim": 1, "F": ["y1"]})", "m"), InputError);
  CHECK_THROWS_AS(parse_model(R"({"dim": 1, "h11": "1", "F": ["y2"]})", "m"), InputError);
  CHECK_THROWS_AS(parse_model(R"({"dim": 1, "h11": "x1", "F": ["y1"]})", "m"), InputError);
  CHECK_THROWS_AS(parse_model(R"({"dim": 2, "h11": "1", "F": ["y1"]})", "m"), InputError);
  CHECK_THROWS_AS(parse_model(R"({"dim": 1, "h11": "1", "F": ["y1"], "domain": {"t": [2, 1]}})", "m"), InputError);
  CHECK_THROWS_AS(parse_model(R"({"dim": 1, "h11": "1", "F": ["y1"]} trailing)", "m"), InputError);

  try {
    parse_model("{\n  \"dim\": 1,\n  \"h11\": \"1\",\n  \"F\": [\"y1 +* 2\"]\n}", "file.json");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("file.json:4: F[0]") != std::string::npos);
  }
}

TEST_CASE("change files") {
  const ChangeFile id = parse_change("{}", "id", 2);
  CHECK(id.change.invertible());
  const ChangeFile nw = load_change(model("sine_newton_2d"), 2);
  CHECK(nw.change.x_inverse().kind == geometry::InverseMap::Kind::Newton);
  CHECK(nw.change.t_inverse().kind == geometry::InverseMap::Kind::Explicit);
  CHECK_THROWS_AS(parse_change(R"({"x_fwd": ["x1 + y1"]})", "c", 1), InputError);
  CHECK_THROWS_AS(parse_change(R"({"t_fwd": "t + x1"})", "c", 1), InputError);
  CHECK_THROWS_AS(load_change(model("sine_newton_2d"), 1), InputError);
}

TEST_CASE("sampling is seeded and stays in the box") {
  Domain d = Domain::standard(2);
  d.x[0] = {2.0, 3.0};
  const auto a = sample_domain(d, 50, 7);
  const auto b = sample_domain(d, 50, 7);
  const auto c = sample_domain(d, 50, 8);
  CHECK(a.size() == 50);
  bool same = true, differ = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    same = same && a[k].t == b[k].t && a[k].x == b[k].x && a[k].y == b[k].y;
    differ = differ || a[k].t != c[k].t;
    CHECK(a[k].t >= 0.5);
    CHECK(a[k].t < 1.5);
    CHECK(a[k].x[0] >= 2.0);
    CHECK(a[k].x[0] < 3.0);
    CHECK(std::abs(a[k].y[1]) <= 1.0);
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("invariants command examples") {
  SUBCASE("flat polar model") {
    const Run r = invariants("polar", "t=0,x=[1.5,0.3],y=[0.2,1]");
    REQUIRE(r.code == kOk);
    const json j = json::parse(r.out);
    for (const char* k : {"epsilon", "P", "R3", "B4", "D5"}) CHECK(max_abs(j["invariants"][k]) < 1e-9);
    CHECK(j["invariants"]["B4"].size() == 2);
    CHECK(j["invariants"]["B4"][0][0][0].size() == 2);
  }
  SUBCASE("rheonomic x1") {
    const Run r = invariants("rheonomic", "t=0,x=[0.3],y=[2]");
    REQUIRE(r.code == kOk);
    const json j = json::parse(r.out);
    CHECK(j["invariants"]["epsilon"][0].get<double>() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(j["invariants"]["P"][0][0].get<double>() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(r.out.find("\"kind\": \"X\"") != std::string::npos);
  }
  SUBCASE("free motion") {
    const Run r = invariants("free", "t=0.2,x=[0.3],y=[-2]");
    REQUIRE(r.code == kOk);
    CHECK(max_abs(json::parse(r.out)["invariants"]) == 0.0);
  }
  SUBCASE("csv and symbolic") {
    const Run r = invariants("rheonomic", "x=[0.3],y=[2]", Format::Csv, true);
    REQUIRE(r.code == kOk);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 6);
    CHECK(ls[0] == "invariant,index,value,expr");
    CHECK(ls[2] == "P,[0][0],0.25,\"0.25\"");
    const Run js = invariants("rheonomic", "x=[0.3],y=[2]", Format::Json, true);
    CHECK(json::parse(js.out)["symbolic"]["epsilon"][0] == "0.5*y1");
  }
  SUBCASE("errors") {
    CHECK(invariants("missing", "x=[1],y=[1]").code == kUsageError);
    CHECK(invariants("rheonomic", "x=[1,2],y=[1]").code == kUsageError);
    CHECK(invariants("rheonomic", "x=[1],y=[1]", Format::Text).code == kUsageError);
    // epsilon = -y1/(2 x1) - x1 is undefined at x1 = 0
    InvariantsOptions o;
    o.model = write_temp("pole_x.json", R"({"dim": 1, "h11": "1", "F": ["y1/x1 + x1"]})");
    o.at = "x=[0],y=[1]";
    const Run r = run(cmd_invariants, o);
    CHECK(r.code == kRuntimeError);
    CHECK(r.err.find("epsilon[0]") != std::string::npos);
    o.model = write_temp("neg_h.json", R"({"dim": 1, "h11": "t", "F": ["y1"]})");
    o.at = "t=-1,x=[0],y=[1]";
    CHECK(run(cmd_invariants, o).code == kRuntimeError);
  }
}

TEST_CASE("trajectory command examples") {
  TrajectoryOptions o;
  o.model = model("free");
  o.at = "t=0,x=[0],y=[1]";
  o.t1 = 1.0;
  o.steps = 10;
  o.out = "-";
  Run r = run(cmd_trajectory, o);
  REQUIRE(r.code == kOk);
  auto ls = lines(r.out);
  REQUIRE(ls.size() == 12);
  CHECK(ls[0] == "t,x1,y1");
  CHECK(csv_fields(ls.back())[1] == 1.0);

  o.model = model("rheonomic");
  o.steps = 1000;
  o.out = temp_path("rheonomic.csv");
  r = run(cmd_trajectory, o);
  REQUIRE(r.code == kOk);
  CHECK(r.out.find("wrote 1001 rows") != std::string::npos);
  ls = lines(slurp(o.out));
  REQUIRE(ls.size() == 1002);
  CHECK(std::abs(csv_fields(ls.back())[2] - std::exp(1.0)) < 1e-5);

  SUBCASE("aborts") {
    o.model = write_temp("pole.json", R"j({"dim": 1, "h11": "1", "F": ["1/(1 - t)"]})j");
    o.at = "t=0,x=[0],y=[0]";
    o.t1 = 2.0;
    o.steps = 4;
    r = run(cmd_trajectory, o);
    CHECK(r.code == kRuntimeError);
    CHECK(r.err.find("last good time t=0.5") != std::string::npos);
    o.steps = 0;
    CHECK(run(cmd_trajectory, o).code == kUsageError);
    o.steps = 4;
    o.t1 = 0.0;
    CHECK(run(cmd_trajectory, o).code == kUsageError);
  }
}

TEST_CASE("deviation command on the sphere") {
  DeviationOptions o;
  o.run.model = model("sphere");
  o.run.at = "t=0,x=[pi/2,0],y=[0,1]";
  o.run.t1 = M_PI;
  o.run.steps = 2000;
  o.run.out = temp_path("sphere_dev.csv");
  o.xi = "[0,0]";
  o.xidot = "[1,0]";
  const Run r = run(cmd_deviation, o);
  REQUIRE(r.code == kOk);
  const auto ls = lines(slurp(o.run.out));
  REQUIRE(ls.size() == 2002);
  CHECK(ls[0] == "t,x1,x2,y1,y2,xi1,xi2,xidot1,xidot2");
  const auto last = csv_fields(ls.back());
  CHECK(std::abs(last[5]) < 1e-5);
  const auto pos = r.out.find("deviation_residual ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(r.out.substr(pos + 19)) < 1e-5);

  o.xi = "[0]";
  CHECK(run(cmd_deviation, o).code == kUsageError);
}

TEST_CASE("covariance command examples") {
  CovarianceOptions o;
  o.model = model("sphere");
  o.change = model("identity_2d");
  Run r = run(cmd_covariance, o);
  CHECK(r.code == kOk);
  CHECK(r.out.find("PASS") != std::string::npos);

  o.format = Format::Json;
  r = run(cmd_covariance, o);
  REQUIRE(r.code == kOk);
  json j = json::parse(r.out);
  CHECK(max_abs(j["discrepancy"]) == 0.0);
  CHECK(j["points_used"] == 8);

  o.model = model("quadratic");
  o.change = model("scale2_1d");
  r = run(cmd_covariance, o);
  CHECK(r.code == kOk);
  CHECK(json::parse(r.out)["pass"] == true);

  o.model = model("rheonomic");
  o.change = model("time2_1d");
  CHECK(run(cmd_covariance, o).code == kOk);

  // a tolerance below rounding error turns the same run into a failure
  o.model = model("generic");
  o.change = model("sine_newton_2d");
  o.tol = 1e-30;
  r = run(cmd_covariance, o);
  CHECK(r.code == kCheckFailed);
  CHECK(json::parse(r.out)["pass"] == false);

  SUBCASE("singular samples are skipped and counted") {
    CovarianceOptions s;
    s.model = write_temp("fold_model.json", R"({"dim": 1, "h11": "1", "F": ["y1^2 + x1"],
      "domain": {"x": [0, 0]}})");
    s.change = write_temp("fold.json", R"({"x_fwd": ["x1^3"], "x_inv": "newton"})");
    s.points = 3;
    const Run f = run(cmd_covariance, s);
    CHECK(f.code == kRuntimeError);
    CHECK(f.out.find("0 used, 3 skipped") != std::string::npos);
  }
}

TEST_CASE("flatness command examples") {
  FlatnessOptions o;
  o.model = model("polar");
  Run r = run(cmd_flatness, o);
  CHECK(r.code == kOk);
  CHECK(lines(r.out)[0] == "FLAT");
  CHECK(r.out.find("Gamma^2_12 = 1/x1") != std::string::npos);

  o.format = Format::Json;
  r = run(cmd_flatness, o);
  json j = json::parse(r.out);
  CHECK(j["curvature_max"].get<double>() < 1e-9);
  CHECK(j["consistent"] == true);

  o.model = model("sphere");
  j = json::parse(run(cmd_flatness, o).out);
  CHECK(j["verdict"] == "NOT FLAT");
  CHECK(j["curvature_max"].get<double>() > 0.5);

  o.model = model("rheonomic");
  j = json::parse(run(cmd_flatness, o).out);
  CHECK(j["verdict"] == "NOT FLAT");
  CHECK(j["invariant_max"]["epsilon"].get<double>() > 0.0);
  CHECK(j["gamma"].is_null());
}

TEST_CASE("identical invocations give identical bytes") {
  CovarianceOptions c;
  c.model = model("generic");
  c.change = model("sine_newton_2d");
  c.seed = 42;
  c.format = Format::Json;
  CHECK(run(cmd_covariance, c).out == run(cmd_covariance, c).out);
  FlatnessOptions f;
  f.model = model("sphere");
  f.seed = 9;
  CHECK(run(cmd_flatness, f).out == run(cmd_flatness, f).out);
  const Run a = invariants("generic", "t=0.7,x=[0.1,0.2],y=[0.3,0.4]");
  CHECK(a.out == invariants("generic", "t=0.7,x=[0.1,0.2],y=[0.3,0.4]").out);
}
