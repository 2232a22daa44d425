// kccjet: invariants, trajectories, deviations, covariance and flatness
// checks for SODE model files. Every flag also reads KCCJET_<NAME>.

#include <cctype>
#include <iostream>

#include "CLI11.hpp"
#include "kccjet/cli.hpp"

namespace cli = kccjet::cli;

namespace {

// --model also reads KCCJET_MODEL, --t1 reads KCCJET_T1, and so on.
template <class T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& target, const std::string& help) {
  std::string env = "KCCJET_";
  for (char c : name) env += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return app->add_option("--" + name, target, help)->envname(env);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kccjet: KCC invariants of second-order systems on the 1-jet space"};
  app.require_subcommand(1);

  std::string format = "json";
  cli::InvariantsOptions inv;
  auto* c_inv = app.add_subcommand("invariants", "evaluate the five invariants at a point");
  flag(c_inv, "model", inv.model, "model JSON file")->required();
  flag(c_inv, "at", inv.at, "point, e.g. \"t=0,x=[1,0],y=[0,1]\"")->required();
  c_inv->add_flag("--symbolic", inv.symbolic, "include symbolic components")->envname("KCCJET_SYMBOLIC");
  flag(c_inv, "format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  std::string t1 = "1";
  cli::TrajectoryOptions tra;
  auto* c_tra = app.add_subcommand("trajectory", "integrate a trajectory with RK4 and write CSV");
  flag(c_tra, "model", tra.model, "model JSON file")->required();
  flag(c_tra, "at", tra.at, "initial point")->required();
  flag(c_tra, "t1", t1, "final time (constant expression)")->required();
  flag(c_tra, "steps", tra.steps, "number of RK4 steps")->required();
  flag(c_tra, "out", tra.out, "CSV path, - for stdout")->required();

  cli::DeviationOptions dev;
  auto* c_dev = app.add_subcommand("deviation", "integrate a trajectory with its deviation field");
  flag(c_dev, "model", dev.run.model, "model JSON file")->required();
  flag(c_dev, "at", dev.run.at, "initial point")->required();
  flag(c_dev, "xi", dev.xi, "initial deviation [..]")->required();
  flag(c_dev, "xidot", dev.xidot, "initial deviation rate [..]")->required();
  flag(c_dev, "t1", t1, "final time (constant expression)")->required();
  flag(c_dev, "steps", dev.run.steps, "number of RK4 steps")->required();
  flag(c_dev, "out", dev.run.out, "CSV path, - for stdout")->required();

  std::string check_format = "text";
  cli::CovarianceOptions cov;
  auto* c_cov = app.add_subcommand("covariance", "compare transform-then-compute with compute-then-transform");
  flag(c_cov, "model", cov.model, "model JSON file")->required();
  flag(c_cov, "change", cov.change, "coordinate change JSON file")->required();
  flag(c_cov, "points", cov.points, "number of sample points")->capture_default_str();
  flag(c_cov, "seed", cov.seed, "sampling seed")->capture_default_str();
  flag(c_cov, "tol", cov.tol, "pass tolerance")->capture_default_str();
  flag(c_cov, "format", check_format, "text or json")->check(CLI::IsMember({"text", "json"}));

  cli::FlatnessOptions fla;
  auto* c_fla = app.add_subcommand("flatness", "check the flat-connection characterization");
  flag(c_fla, "model", fla.model, "model JSON file")->required();
  flag(c_fla, "points", fla.points, "number of sample points")->capture_default_str();
  flag(c_fla, "seed", fla.seed, "sampling seed")->capture_default_str();
  flag(c_fla, "tol", fla.tol, "vanishing tolerance")->capture_default_str();
  flag(c_fla, "format", check_format, "text or json")->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsageError;
  }

  if (c_inv->parsed()) {
    inv.format = cli::parse_format(format);
    return cli::cmd_invariants(inv, std::cout, std::cerr);
  }
  if (c_tra->parsed() || c_dev->parsed()) {
    try {
      tra.t1 = dev.run.t1 = cli::parse_constant(t1);
    } catch (const cli::InputError& e) {
      std::cerr << "error: --t1: " << e.what() << '\n';
      return cli::kUsageError;
    }
    return c_tra->parsed() ? cli::cmd_trajectory(tra, std::cout, std::cerr)
                           : cli::cmd_deviation(dev, std::cout, std::cerr);
  }
  if (c_cov->parsed()) {
    cov.format = cli::parse_format(check_format);
    return cli::cmd_covariance(cov, std::cout, std::cerr);
  }
  fla.format = cli::parse_format(check_format);
  return cli::cmd_flatness(fla, std::cout, std::cerr);
}
