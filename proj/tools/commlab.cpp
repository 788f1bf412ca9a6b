// commlab: run experiments, re-verify stored runs, export graphs and metrics.

#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commlab/harness.hpp"

using namespace commlab::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Config-mirroring flags, kept as strings until they are typed against the
// document they override.
struct Overrides {
  std::map<std::string, std::string> ints, floats, strings, bools;
  std::string corrupt;

  void add(CLI::App* app) {
    for (const char* k : {"n", "t", "kappa", "committee", "sig_threshold", "bridges", "threshold", "max_corrupt",
                          "cut_list_cap", "prime"}) {
      app->add_option(std::string("--") + k, ints[k]);
    }
    for (const char* k : {"beta", "delta"}) app->add_option(std::string("--") + k, floats[k]);
    for (const char* k : {"id", "protocol", "adversary", "reducer", "alpha", "channel", "ideal_mode", "honesty"}) {
      app->add_option(std::string("--") + k, strings[k]);
    }
    for (const char* k : {"replays", "view_check", "metrics", "artifacts"}) {
      app->add_option(std::string("--") + k, bools[k])->check(CLI::IsMember({"true", "false"}));
    }
    app->add_option("--corrupt", corrupt, "comma-separated party indices");
  }

  void apply(json& doc) const {
    for (const auto& [k, v] : ints) {
      if (v.empty()) continue;
      try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        doc[k] = x;
      } catch (const std::exception&) {
        throw ConfigError("--" + k + " needs an integer");
      }
    }
    for (const auto& [k, v] : floats) {
      if (v.empty()) continue;
      try {
        doc[k] = std::stod(v);
      } catch (const std::exception&) {
        throw ConfigError("--" + k + " needs a number");
      }
    }
    for (const auto& [k, v] : strings) {
      if (!v.empty()) doc[k] = v;
    }
    for (const auto& [k, v] : bools) {
      if (!v.empty()) doc[k] = v == "true";
    }
    if (!corrupt.empty()) {
      json arr = json::array();
      std::stringstream ss(corrupt);
      for (std::string tok; std::getline(ss, tok, ',');) {
        try {
          arr.push_back(std::stoi(tok));
        } catch (const std::exception&) {
          throw ConfigError("--corrupt needs integers");
        }
      }
      doc["corrupt"] = arr;
    }
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read", p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f || !(f << text)) throw IoError("cannot write", out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"commlab experiment runner"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a seed sweep");
  std::string config_path, seeds, out;
  int workers = 1;
  Overrides ov;
  run->add_option("--config", config_path)->required();
  run->add_option("--seeds", seeds, "a..b, inclusive");
  run->add_option("--out", out, "output root (default $COMMLAB_OUT or ./out)");
  run->add_option("--workers", workers)->check(CLI::PositiveNumber);
  ov.add(run);

  auto* verify = app.add_subcommand("verify", "re-check invariants from stored traces");
  std::string verify_in;
  verify->add_option("--in", verify_in, "experiment directory")->required();

  auto* exp = app.add_subcommand("export", "export DOT or CSV from a run");
  std::string export_in, format, export_out;
  std::int64_t export_seed = -1;
  exp->add_option("--in", export_in, "experiment directory")->required();
  exp->add_option("--format", format)->required()->check(CLI::IsMember({"dot", "csv"}));
  exp->add_option("--seed", export_seed, "seed for dot (default: first with a trace)");
  exp->add_option("--output", export_out, "file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      json doc = read_config_document(config_path);
      ov.apply(doc);
      if (!seeds.empty()) doc["seeds"] = seeds;
      const auto cfg = config_from_json(doc);
      const auto root = output_root(out.empty() ? std::nullopt : std::optional<std::string>(out));
      const auto rep = run_experiment(cfg, {root, workers});
      const auto& ag = rep.aggregate;
      std::cout << cfg.id << ": " << ag["runs"] << " seeds, " << ag["violations"] << " violations -> "
                << (root / cfg.id / "report.json").string() << "\n";
      if (ag.contains("attack") && ag["attack"].contains("events")) {
        const auto& ev = ag["attack"]["events"];
        std::cout << "  Pr[E1 and E2] = " << ev["freq_e1_and_e2"] << " wilson " << ev["wilson_e1_and_e2"]
                  << ", Pr[E2 | E1] = " << ev["freq_e2_given_e1"] << "\n";
      }
      for (const auto& r : rep.records) {
        for (const auto& v : r.violations) std::cerr << "seed " << r.seed << ": " << v << "\n";
      }
      return rep.violations() == 0 ? kExitOk : kExitViolations;
    }
    if (*verify) {
      const auto res = verify_directory(verify_in);
      for (const auto& p : res.problems) std::cerr << p << "\n";
      std::cout << "checked " << res.checked_seeds << " traces, " << res.problems.size() << " problems\n";
      return res.ok() ? kExitOk : kExitViolations;
    }
    const fs::path dir = export_in;
    const auto report = json::parse(slurp(dir / "report.json"));
    if (format == "csv") {
      emit(export_metrics_csv(report), export_out);
      return kExitOk;
    }
    const auto cfg = config_from_json(report.at("config"));
    fs::path trace_path;
    for (const auto& r : report.at("records")) {
      const auto s = r.at("seed").get<std::int64_t>();
      if (export_seed >= 0 && s != export_seed) continue;
      const auto p = dir / std::to_string(s) / "trace.ndjson";
      if (fs::exists(p)) {
        trace_path = p;
        break;
      }
    }
    if (trace_path.empty()) throw IoError("no stored trace", dir);
    emit(export_dot(commlab::netsim::Trace::from_ndjson(slurp(trace_path)), default_highlight(cfg)), export_out);
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const json::exception& e) {
    std::cerr << "i/o error: malformed report: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitViolations;
  }
}
