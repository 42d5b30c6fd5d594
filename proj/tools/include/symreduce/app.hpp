#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "symreduce/numverify.hpp"

namespace symreduce::app {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr std::uint64_t kDefaultSeed = 17;

/// Schema violation in a run configuration. `pointer` is the JSON pointer of
/// the offending value ("" for the document itself).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& what)
      : std::runtime_error((pointer.empty() ? std::string("/") : pointer) + ": " + what),
        pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct RunConfig {
  ProblemSpec spec;
  Json parameters;  // the numeric parameters as given, echoed in reports
  OrbitState initial;
  IntegratorOptions integrator;
  double t_end = 50.0;
  // Further parameter points for frequency checks, each a full spec.
  std::vector<ProblemSpec> sweep;
  std::optional<std::string> csv;
  std::uint64_t seed = kDefaultSeed;
  bool parallel = false;
};

/// Parses and validates a JSON run configuration. Unknown keys and keys
/// that do not apply to the family are rejected.
RunConfig parse_problem_config(std::string_view text);

enum class Command { Reduce, Symmetries, Verify, Orbit, Full };

std::optional<Command> parse_command(std::string_view name);
std::string command_name(Command c);

struct Report {
  Json json;
  int exit_code = 0;  // 0 all checks passed, 1 a check failed or errored
  std::string csv;    // trajectory export, orbit command only
};

Report run(Command command, const RunConfig& cfg);

/// Trajectory samples as CSV with header t,r,r_dot,angle,angle_dot.
std::string trajectory_csv(const Trajectory& traj);

/// Plain-text rendering of a report with Greek symbol names.
std::string render_text(const Json& report);

}  // namespace symreduce::app
