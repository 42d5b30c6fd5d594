#include <algorithm>

#include "doctest.h"
#include "symreduce/app.hpp"

using namespace symreduce;
using namespace symreduce::app;

namespace {
std::string pointer_of(const std::string& text) {
  try {
    parse_problem_config(text);
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "<accepted>";
}

const Json* find_check(const Json& report, const std::string& name) {
  for (const auto& c : report["checks"])
    if (c["name"] == name) return &c;
  return nullptr;
}

int count_status(const Json& report, const std::string& prefix, const std::string& status) {
  int n = 0;
  for (const auto& c : report["checks"])
    if (c["name"].get<std::string>().rfind(prefix, 0) == 0 && c["status"] == status) ++n;
  return n;
}
}  // namespace

TEST_CASE("config defaults") {
  auto cfg = parse_problem_config(R"({"family":"kepler","mu":1.0})");
  CHECK(cfg.spec.family == Family::Kepler);
  CHECK(cfg.spec.mu.is_one());
  CHECK(cfg.integrator.tol == 1e-10);
  CHECK(cfg.t_end == 50.0);
  CHECK(cfg.seed == kDefaultSeed);
  CHECK(cfg.initial.angle_dot == 1.2);
  CHECK(cfg.sweep.empty());
}

TEST_CASE("MICZ special case is detected from the numbers") {
  auto special = parse_problem_config(R"({"family":"micz","mu":1.0,"lambda":0.5,"nu":-0.125})");
  CHECK(special.spec.special_case());
  auto implied = parse_problem_config(R"({"family":"micz","mu":1.0,"lambda":0.5})");
  CHECK(implied.spec.special_case());
  auto general = parse_problem_config(R"({"family":"micz","mu":1.0,"lambda":0.5,"nu":0.1})");
  CHECK_FALSE(general.spec.special_case());
  CHECK(equals(general.spec.nu, Expr(Rational(1, 10))));
}

TEST_CASE("cone drag takes g as an expression") {
  auto cfg = parse_problem_config(R"j({"family":"cone_drag","mu":1.0,"g":"exp(-t)"})j");
  REQUIRE(cfg.spec.g.has_value());
  CHECK(equals(*cfg.spec.g, exp(-Expr::symbol("t"))));
}

TEST_CASE("schema violations carry JSON pointers") {
  CHECK(pointer_of(R"({"family":"kepler","mu":1,"foo":2})") == "/foo");
  CHECK(pointer_of(R"({"family":"kepler","mu":1,"alpha":2})") == "/alpha");
  CHECK(pointer_of(R"({"family":"kepler","mu":1,"initial":{"x":1}})") == "/initial/x");
  CHECK(pointer_of(R"({"family":"kepler","mu":"one"})") == "/mu");
  CHECK(pointer_of(R"({"family":"kepler"})") == "/mu");
  CHECK(pointer_of(R"({"mu":1})") == "/family");
  CHECK(pointer_of(R"({"family":"orbit","mu":1})") == "/family");
  CHECK(pointer_of(R"({"family":"cone_drag","mu":1,"g":"exp(-"})") == "/g");
  CHECK(pointer_of(R"j({"family":"cone_drag","mu":1,"g":"exp(-r)"})j") == "/g");
  CHECK(pointer_of(R"({"family":"kepler","mu":1,"tol":-1})") == "/tol");
  CHECK(pointer_of(R"({"family":"kepler","mu":1,"initial":{"r":0}})") == "/initial/r");
  CHECK(pointer_of(R"({"family":"micz","mu":1,"lambda":0.5,"sweep":[{"nu":0},{"g":1}]})") ==
        "/sweep/1/g");
  CHECK(pointer_of(R"({"family":"a/b~c","mu":1,"a/b":1})") == "/family");
  CHECK(pointer_of(R"({"family":"kepler","mu":1,"a/b~c":1})") == "/a~1b~0c");
  CHECK(pointer_of("[1, 2]") == "");
  CHECK(pointer_of("{not json") == "");
}

TEST_CASE("command names") {
  for (auto c : {Command::Reduce, Command::Symmetries, Command::Verify, Command::Orbit,
                 Command::Full})
    CHECK(parse_command(command_name(c)) == c);
  CHECK_FALSE(parse_command("everything").has_value());
}

TEST_CASE("full run on Kepler defaults passes") {
  auto cfg = parse_problem_config(R"({"family":"kepler","mu":1.0})");
  auto rep = run(Command::Full, cfg);
  CHECK(rep.exit_code == 0);
  CHECK(rep.json["schema_version"] == kSchemaVersion);
  CHECK(rep.json["summary"]["failed"] == 0);
  CHECK(rep.json["summary"]["errored"] == 0);
  CHECK(rep.json["symmetries"]["reduced"]["generators"].size() == 9);
  CHECK(rep.json["symmetries"]["reduced"]["rank"] == 9);
  int zero_residuals = 0;
  for (const auto& g : rep.json["symmetries"]["reduced"]["generators"])
    zero_residuals += g["determining_residual_zero"].get<bool>();
  CHECK(zero_residuals == 9);
  for (const auto& c : rep.json["checks"]) {
    CAPTURE(c.dump());
    if (c["status"] == "pass") CHECK_FALSE(c["value"].is_null());
  }
  CHECK(rep.json["verify"].contains("symmetry_defects"));
}

TEST_CASE("reports are deterministic") {
  auto cfg = parse_problem_config(
      R"({"family":"micz","mu":1.0,"lambda":0.5,"nu":0.0,
          "sweep":[{"lambda":0.4,"nu":0.02},{"lambda":0.6,"nu":-0.03}]})");
  auto a = run(Command::Full, cfg).json.dump();
  auto b = run(Command::Full, cfg).json.dump();
  CHECK(a == b);
  cfg.parallel = true;
  CHECK(run(Command::Full, cfg).json.dump() == a);
  cfg.seed = 99;
  auto c = run(Command::Full, cfg).json;
  CHECK(c["seed"] == 99);
}

TEST_CASE("general MICZ records one consistent frequency verdict") {
  auto cfg = parse_problem_config(
      R"({"family":"micz","mu":1.0,"lambda":0.5,"nu":0.0,
          "sweep":[{"lambda":0.4,"nu":0.02},{"lambda":0.6,"nu":-0.03}]})");
  auto rep = run(Command::Verify, cfg);
  const Json& f = rep.json["verify"]["frequency"];
  CHECK(f["points"].size() == 3);
  CHECK(f["consistent"] == true);
  CHECK(f["verdict"] == "derived");
  for (const auto& p : f["points"]) CHECK(p["candidates"].size() == 2);
  CHECK(rep.exit_code == 0);
}

TEST_CASE("non-linearizable power law is flagged") {
  auto cfg = parse_problem_config(R"({"family":"power_law","mu":1.0,"alpha":-2})");
  auto rep = run(Command::Reduce, cfg);
  const Json& d = rep.json["reduce"]["direct"];
  CHECK(d["linearizable"] == false);
  CHECK(equals(parse_infix(d["equation"].get<std::string>()),
               parse_infix("u'' + u - 1/(L^2*u)")));
  CHECK(rep.json["reduce"]["nucci"]["applicable"] == false);
  CHECK(rep.exit_code == 0);
}

TEST_CASE("degenerate angular rate skips the reduction checks") {
  auto cfg = parse_problem_config(R"({"family":"kepler","mu":1.0,"initial":{"angle_dot":0}})");
  auto rep = run(Command::Verify, cfg);
  const Json* osc = find_check(rep.json, "verify.oscillator.direct");
  REQUIRE(osc != nullptr);
  CHECK((*osc)["status"] == "skipped");
  CHECK((*osc)["detail"] == "u₂=0");
  CHECK(rep.json["verify"]["orbit"]["singular"] == true);
  CHECK(count_status(rep.json, "verify.conservation", "fail") == 0);
  CHECK(render_text(rep.json).find("skipped: u₂=0") != std::string::npos);
}

TEST_CASE("a failing check gives exit code 1") {
  auto cfg = parse_problem_config(R"({"family":"kepler","mu":1.0,"tol":1e-3,"h_max":5})");
  auto rep = run(Command::Verify, cfg);
  CHECK(rep.exit_code == 1);
  CHECK(count_status(rep.json, "verify.conservation", "fail") > 0);
}

TEST_CASE("module errors become errored checks") {
  auto cfg = parse_problem_config(R"({"family":"micz","mu":1.0,"lambda":2})");
  auto rep = run(Command::Verify, cfg);
  CHECK(rep.exit_code == 1);
  const Json* c = find_check(rep.json, "verify.integrate");
  REQUIRE(c != nullptr);
  CHECK((*c)["status"] == "error");
}

TEST_CASE("orbit export") {
  auto cfg = parse_problem_config(R"({"family":"kepler_drag","mu":1.0,"alpha":0.01,"t_end":5})");
  auto rep = run(Command::Orbit, cfg);
  CHECK(rep.exit_code == 0);
  REQUIRE(rep.csv.rfind("t,r,r_dot,angle,angle_dot\n", 0) == 0);
  auto lines = std::count(rep.csv.begin(), rep.csv.end(), '\n');
  CHECK(lines == rep.json["orbit"]["samples"].get<long>() + 1);
  CHECK(rep.json["orbit"]["csv"] == "stdout");
  CHECK_FALSE(rep.json.contains("reduce"));
}

TEST_CASE("text report uses display names") {
  auto cfg = parse_problem_config(R"({"family":"kepler_drag","mu":1.0,"alpha":0.01})");
  auto text = render_text(run(Command::Reduce, cfg).json);
  CHECK(text.find("θ") != std::string::npos);
  CHECK(text.find("u₁ = ") != std::string::npos);
  CHECK(text.find("reduce.pipelines_agree.omega_sq") != std::string::npos);
}
