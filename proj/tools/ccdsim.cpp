// ccdsim: command-line front end of the simulator.
//
// Exit codes: 0 ok, 1 unexpected error, 2 config error, 3 invariant failure,
// 4 check-tolerance failure (with --check), 5 missing required field.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ccd/core/operator.hpp"
#include "ccd/experiments/experiments.hpp"
#include "ccd/io/config.hpp"
#include "ccd/io/output.hpp"

namespace {

namespace ex = ccd::experiments;
namespace io = ccd::io;

enum Exit { kOk = 0, kError = 1, kConfig = 2, kInvariant = 3, kCheck = 4, kMissing = 5 };

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long long> realizations;
  std::optional<double> horizon_us;
  std::optional<std::string> frame, variant, kernel;
  std::optional<long long> threads;
  std::vector<std::string> sets;
  bool check = false;
  bool quiet = false;
  bool list_keys = false;
  std::string out = ".";
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "key=value config file");
  app->add_option("--seed", f.seed, "master seed (u64)");
  app->add_option("--realizations", f.realizations, "noise realizations N");
  app->add_option("--horizon-us", f.horizon_us, "simulated time in us");
  app->add_option("--frame", f.frame, "simulation frame")->check(CLI::IsMember({"lab", "int1", "int2"}));
  app->add_option("--variant", f.variant, "second-drive form")->check(CLI::IsMember({"refined", "simplified"}));
  app->add_option("--threads", f.threads, "worker threads (results do not depend on it)");
  app->add_option("--kernel", f.kernel, "Bloch step kernel")
      ->check(CLI::IsMember({"auto", "reference", "portable", "avx2"}));
  app->add_option("--set", f.sets, "extra override key=value (repeatable)");
  app->add_flag("--check", f.check, "exit 4 when a reference check fails");
  app->add_option("--out", f.out, "output directory");
  app->add_flag("--quiet", f.quiet, "no progress lines on stderr");
  app->add_flag("--list-keys", f.list_keys, "print the config keys with their defaults and exit");
}

io::Config build_config(const std::string& sub, const Flags& f) {
  io::Config c = ex::default_config(sub);
  if (!f.config.empty()) c.load_file(f.config);
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw io::ConfigError("--set expects key=value, got '" + s + "'");
    c.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (f.seed) c.set("seed", std::to_string(*f.seed));
  if (f.realizations) c.set("realizations", std::to_string(*f.realizations));
  if (f.horizon_us) c.set("horizon_us", *f.horizon_us);
  if (f.frame) c.set("frame", *f.frame);
  if (f.variant) c.set("variant", *f.variant);
  if (f.threads) c.set("threads", std::to_string(*f.threads));
  if (f.kernel) c.set("kernel", *f.kernel);
  return c;
}

void list_keys(const io::Config& c) {
  for (const auto& k : c.schema())
    std::cout << k.key << " = " << (k.fallback ? *k.fallback : "<required>") << "    # " << k.help << '\n';
}

int execute(const std::string& sub, const Flags& f, const std::vector<std::string>& argv) {
  io::Config cfg;
  try {
    cfg = build_config(sub, f);
    if (f.list_keys) {
      list_keys(cfg);
      return kOk;
    }
    ex::resolve(cfg);
  } catch (const io::MissingField& e) {
    std::cerr << "ccdsim: " << e.what() << '\n';
    return kMissing;
  } catch (const io::ConfigError& e) {
    std::cerr << "ccdsim: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ccd::InvariantViolation& e) {
    std::cerr << "ccdsim: invariant violation: " << e.what() << '\n';
    return kInvariant;
  }

  io::RunManifest manifest;
  manifest.subcommand = sub;
  manifest.config = io::config_echo(cfg);
  manifest.seed = cfg.unsigned64("seed");
  manifest.version = io::tool_version();
  manifest.command_line = argv;
  manifest.started_utc = io::utc_timestamp();

  ex::Outcome outcome;
  try {
    outcome = ex::run(cfg, f.quiet ? nullptr : &std::cerr);
  } catch (const ccd::InvariantViolation& e) {
    std::cerr << "ccdsim: invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const io::MissingField& e) {
    std::cerr << "ccdsim: " << e.what() << '\n';
    return kMissing;
  } catch (const io::ConfigError& e) {
    std::cerr << "ccdsim: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ccdsim: config error: " << e.what() << '\n';
    return kConfig;
  }
  manifest.finished_utc = io::utc_timestamp();

  const std::filesystem::path dir(f.out);
  std::filesystem::create_directories(dir);
  for (const auto& t : outcome.tables) {
    const auto path = (dir / (t.name + ".csv")).string();
    io::write_csv_file(path, t);
    manifest.outputs.push_back(path);
  }
  io::Json summary;
  summary["subcommand"] = sub;
  summary["config"] = manifest.config;
  summary["reference"] = io::Json::array();
  for (const auto& r : outcome.references) summary["reference"].push_back(ex::to_json(r));
  summary["checks"] = io::Json::array();
  for (const auto& c : outcome.checks) summary["checks"].push_back(ex::to_json(c));
  summary["pass"] = outcome.pass();
  summary["results"] = outcome.results;
  const auto summary_path = (dir / (sub + ".json")).string();
  const auto manifest_path = (dir / (sub + ".manifest.json")).string();
  manifest.outputs.push_back(summary_path);
  manifest.outputs.push_back(manifest_path);
  io::write_json_file(summary_path, summary);
  io::write_json_file(manifest_path, manifest.to_json());

  for (const auto& c : outcome.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << io::format_number(c.value)
              << " expected=" << io::format_number(c.expected) << '\n';
  return f.check && !outcome.pass() ? kCheck : kOk;
}

}  // namespace

static std::string describe(const std::string& sub) {
  static const std::map<std::string, std::string> text{
      {"rabi", "single-drive Rabi decay and its Gaussian envelope"},
      {"persistent-rabi", "spin-locked Rabi contrast under a second drive, with a single-drive control"},
      {"dressed-ramsey", "dressed-qubit T2 against the single-drive T2"},
      {"t2-sweep", "T2 over a log grid of second-drive amplitudes"},
      {"order-scaling", "T2 and envelope model for 1..4 concatenated drives"},
      {"dressed-control", "rf control of the dressed qubit, oscillation frequency"},
      {"two-qubit-fidelity", "dressed two-qubit gate fidelity with and without the second drive"},
      {"noise-selfcheck", "statistical checks of the OU noise generator"},
  };
  const auto it = text.find(sub);
  return it == text.end() ? std::string() : it->second;
}

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo simulator of concatenated continuous dynamical decoupling"};
  app.require_subcommand(1);
  std::vector<Flags> flags(ex::subcommands().size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < ex::subcommands().size(); ++i) {
    CLI::App* s = app.add_subcommand(ex::subcommands()[i], describe(ex::subcommands()[i]));
    add_flags(s, flags[i]);
    subs.push_back(s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  const std::vector<std::string> args(argv, argv + argc);
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      return execute(ex::subcommands()[i], flags[i], args);
    } catch (const std::exception& e) {
      std::cerr << "ccdsim: error: " << e.what() << '\n';
      return kError;
    }
  }
  return kError;
}
