#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "symreduce/app.hpp"

using namespace symreduce;

namespace {

constexpr int kConfigError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw app::ConfigError("", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("error writing " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Symbolic reduction of central-force problems to an oscillator"};
  std::string command, config_path, out_path;
  std::uint64_t seed = app::kDefaultSeed;
  bool parallel = false;

  cli.add_option("command", command, "reduce, symmetries, verify, orbit or full")
      ->required()
      ->check(CLI::IsMember({"reduce", "symmetries", "verify", "orbit", "full"}));
  cli.add_option("--config", config_path, "JSON run configuration")->required();
  cli.add_option("--out", out_path, "write the JSON report here ('-' for stdout)");
  auto* seed_opt = cli.add_option("--seed", seed, "seed for sampled-point checks");
  cli.add_flag("--parallel", parallel, "run parameter sweeps concurrently");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = cli.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  app::RunConfig cfg;
  try {
    cfg = app::parse_problem_config(read_file(config_path));
  } catch (const app::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  if (seed_opt->count() > 0) cfg.seed = seed;
  cfg.parallel = parallel;

  auto report = app::run(*app::parse_command(command), cfg);
  std::string json = report.json.dump(2) + "\n";

  try {
    bool csv_to_stdout = !report.csv.empty() && !cfg.csv;
    if (!report.csv.empty()) {
      if (cfg.csv)
        write_file(*cfg.csv, report.csv);
      else
        std::cout << report.csv;
    }
    std::ostream& text = csv_to_stdout ? std::cerr : std::cout;
    if (out_path == "-") {
      std::cout << json;
    } else {
      if (!out_path.empty()) write_file(out_path, json);
      text << app::render_text(report.json);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return report.exit_code;
}
