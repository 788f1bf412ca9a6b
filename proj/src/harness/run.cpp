#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "commlab/harness.hpp"

namespace commlab::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kInputStream = netsim::kAdversaryStream + 3;

bool is_broadcast(const std::string& pid) { return pid == "flooding" || pid == "strawman"; }
bool is_committee(const std::string& pid) { return pid == "pi_ne" || pid == "pi_a_ne"; }
bool is_attack(const std::string& aid) { return aid == "isolate-honest" || aid == "isolate-corrupt"; }

int count_corruptions(const netsim::Trace& t) {
  int c = 0;
  for (const auto& e : t.events) c += e.kind == netsim::EventKind::corrupt ? 1 : 0;
  return c;
}

VertexSet left_half(int n) {
  VertexSet s(n / 2);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

// Expansion, locality and the alpha-cut list of G_full.
json trace_metrics(const ExperimentConfig& cfg, const netsim::Trace& trace) {
  json m;
  const auto g = netsim::build_graphs(trace, netsim::parse_honesty(cfg.honesty)).full;
  const auto h = graphkit::edge_expansion_detailed(g);
  m["h_num"] = h.ratio.numerator;
  m["h_den"] = h.ratio.denominator;
  m["h_exact"] = h.exact;
  try {
    m["locality"] = netsim::locality(trace).max;
  } catch (const netsim::UndefinedLocality&) {
    m["locality"] = nullptr;
  }
  const int alpha = cfg.alpha_value();
  graphkit::CutEnumerator en(g);
  json cuts = json::array();
  std::optional<std::int64_t> min_weight;
  int count = 0;
  bool truncated = false;
  while (auto c = en.next()) {
    if (!min_weight) min_weight = c->weight;
    if (c->weight > alpha) break;
    if (count == cfg.cut_list_cap) {
      truncated = true;
      break;
    }
    cuts.push_back({{"side", c->side_s}, {"weight", c->weight}});
    ++count;
  }
  m["cut_weight"] = min_weight ? json(*min_weight) : json(nullptr);
  m["alpha_cuts"] = cuts;
  m["alpha_cuts_truncated"] = truncated;
  if (is_committee(cfg.protocol) || cfg.protocol == "strawman") {
    VertexSet right(cfg.n - cfg.n / 2);
    std::iota(right.begin(), right.end(), cfg.n / 2);
    m["cross_half"] = graphkit::edges_between(g, left_half(cfg.n), right);
  }
  return m;
}

// Invariants of runs in which every party follows the protocol.
std::vector<std::string> honest_checks(const ExperimentConfig& cfg, const netsim::Trace& trace,
                                       const json& metrics, bool structure) {
  std::vector<std::string> v;
  if (is_broadcast(cfg.protocol)) {
    const auto chk = protocols::check_broadcast(trace, cfg.kappa);
    if (!chk.agreement) v.push_back("contract: agreement");
    if (!chk.validity) v.push_back("contract: validity");
  } else {
    const auto want = protocols::reduce(cfg.reducer, trace.inputs, cfg.kappa);
    for (int p = 0; p < trace.n; ++p) {
      if (trace.corrupted_at_output[p]) continue;
      if (trace.outputs[p] != want) {
        v.push_back("contract: output of party " + std::to_string(p));
        break;
      }
    }
  }
  if (structure && is_committee(cfg.protocol) && !metrics.is_null()) {
    const std::int64_t np = cfg.committee;
    const bool adaptive = cfg.protocol == "pi_a_ne";
    const std::int64_t want_cross = adaptive ? np : np * np;
    if (metrics.at("cross_half").get<std::int64_t>() != want_cross) v.push_back("structure: cross-half edges");
    // h <= 2 n'^2 / n, compared exactly.
    const auto hn = metrics.at("h_num").get<std::int64_t>(), hd = metrics.at("h_den").get<std::int64_t>();
    if (hn * cfg.n > 2 * np * np * hd) v.push_back("structure: expansion bound");
    const int m = cfg.n / 2;
    const int bound = adaptive ? 2 * (m - 1) + 1 : 2 * (m - 1) + static_cast<int>(np);
    if (!metrics.at("locality").is_null() && metrics.at("locality").get<int>() > bound) {
      v.push_back("structure: locality bound");
    }
  }
  return v;
}

bool gamma_is_partition(const adversary::AttackReport& r, int n) {
  std::vector<int> seen(n, 0);
  for (const auto& u : r.gamma1) {
    for (int v : u) {
      if (v < 0 || v >= n || v == r.istar) return false;
      ++seen[v];
    }
  }
  for (int v = 0; v < n; ++v) {
    if (v != r.istar && seen[v] != 1) return false;
  }
  return true;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write", p);
  out << content;
  if (!out) throw IoError("write failed", p);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read", p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<Bytes> seed_inputs(std::uint64_t seed, int n, int kappa) {
  CoinStream c(seed, kInputStream);
  std::vector<Bytes> x(n, Bytes(kappa));
  for (auto& xi : x) {
    for (auto& b : xi) b = c.bit() ? 1 : 0;
  }
  return x;
}

Interval wilson_interval(std::int64_t k, std::int64_t n, double z) {
  if (n <= 0) return {0, 1};
  const double p = static_cast<double>(k) / n;
  const double z2 = z * z;
  const double den = 1 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / den;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4.0 * n * n)) / den;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

SeedRecord run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedRecord rec;
  rec.seed = seed;
  json d;
  d["seed"] = seed;
  const auto pp = cfg.protocol_params();
  const auto x = seed_inputs(seed, cfg.n, cfg.kappa);
  const int budget = cfg.budget();
  d["budget"] = budget;
  try {
    if (is_attack(cfg.adversary)) {
      const auto s = cfg.adversary == "isolate-honest" ? adversary::Strategy::honest_istar
                                                        : adversary::Strategy::corrupt_istar;
      auto run = adversary::run_attack(cfg.protocol, pp, s, cfg.attack_params(), x, seed, cfg.replays);
      rec.trace = std::move(run.trace);
      const auto& r = run.report;
      d["attack"] = json::parse(adversary::to_json(r));
      if (r.phase2 && r.failure != "partition" && !gamma_is_partition(r, cfg.n)) {
        rec.violations.push_back("partition: gamma1 does not partition the parties");
      }
      if (is_broadcast(cfg.protocol)) {
        bool ok = true;
        for (int p = 0; p < cfg.n; ++p) {
          if (rec.trace.corrupted_at_output[p]) continue;
          const auto& out = rec.trace.outputs[p];
          if (!out || protocols::split_claims(*out, cfg.n, cfg.kappa)[r.istar] != x[r.istar]) ok = false;
        }
        d["istar_validity"] = ok;
      }
      if (cfg.view_check) {
        auto y = x;
        for (auto& b : y[r.istar]) b ^= 1;
        const auto v = adversary::view_independence_check(cfg.protocol, pp, cfg.attack_params(), seed, x, y);
        d["view"] = {{"comparable", v.comparable}, {"identical", v.identical}, {"reason", v.reason},
                     {"checked", v.checked},       {"differing", v.differing}};
      }
    } else {
      adversary::AdversarySpec spec;
      spec.id = cfg.adversary;
      spec.corrupt = cfg.corrupt;
      spec.max_corrupt = cfg.max_corrupt;
      spec.attack = cfg.attack_params();
      spec.prime = cfg.prime;
      auto adv = adversary::make_adversary(spec);
      netsim::ExecutionInstance inst;
      inst.protocol = protocols::make_protocol(cfg.protocol, pp);
      inst.adversary = adv;
      inst.budget = budget;
      inst.kappa = cfg.kappa;
      inst.channel = netsim::parse_channel(cfg.channel);
      inst.honesty = netsim::parse_honesty(cfg.honesty);
      inst.ideal_mode = netsim::parse_ideal_mode(cfg.ideal_mode);
      inst.inputs = x;
      inst.seed = seed;
      rec.trace = netsim::run_instance(inst);
      if (auto* mal = dynamic_cast<adversary::NeMalicious*>(adv.get())) {
        auto xp = x;
        for (const auto& [p, v] : mal->substituted()) xp[p] = v;
        const auto want = protocols::reduce(cfg.reducer, xp, cfg.kappa);
        bool ok = true;
        for (int p = 0; p < cfg.n; ++p) {
          if (!rec.trace.corrupted_at_output[p] && rec.trace.outputs[p] != want) ok = false;
        }
        bool event = false;
        if (auto committees = protocols::committees_of(*inst.protocol)) {
          const auto q = protocols::ne_params(pp, cfg.protocol == "pi_a_ne");
          event = adversary::committee_supermajority(*committees, rec.trace.corrupted_at_output, q.m, q.n_prime,
                                                     cfg.delta);
        }
        d["robust_ok"] = ok;
        d["supermajority"] = event;
        d["corrupted_set"] = mal->corrupted();
        if (!ok && !event) rec.violations.push_back("robustness: wrong output without a supermajority event");
      }
    }
    const int corr = count_corruptions(rec.trace);
    d["corruptions"] = corr;
    if (corr > budget) rec.violations.push_back("budget: " + std::to_string(corr) + " corruptions");
    d["rounds"] = rec.trace.rounds;
    json metrics = nullptr;
    if (cfg.metrics) metrics = trace_metrics(cfg, rec.trace);
    d["metrics"] = metrics;
    if (cfg.adversary == "none" || cfg.adversary == "passive") {
      auto v = honest_checks(cfg, rec.trace, metrics, cfg.adversary == "none");
      d["contract_ok"] = std::none_of(v.begin(), v.end(), [](const std::string& s) { return s.rfind("contract", 0) == 0; });
      rec.violations.insert(rec.violations.end(), v.begin(), v.end());
    }
  } catch (const netsim::BudgetExceeded& e) {
    rec.violations.push_back(std::string("budget: ") + e.what());
  } catch (const std::exception& e) {
    rec.violations.push_back(std::string("error: ") + e.what());
  }
  d["violations"] = rec.violations;
  rec.data = std::move(d);
  return rec;
}

json aggregate(const ExperimentConfig& cfg, const std::vector<SeedRecord>& records) {
  json a;
  std::int64_t runs = 0, bad_seeds = 0, violations = 0;
  std::map<std::string, std::int64_t> kinds;
  int max_corr = 0;
  std::int64_t contract = 0, contract_n = 0;
  double h_sum = 0;
  std::int64_t h_n = 0;
  int loc_max = -1;
  std::int64_t cut_min = -1;
  std::int64_t p2 = 0, p3 = 0, e1 = 0, e2 = 0, e12 = 0, flagged = 0, valid = 0, valid_n = 0;
  std::map<std::string, std::int64_t> failures;
  std::int64_t comparable = 0, identical = 0, robust_ok = 0, robust_n = 0, events = 0, unexplained = 0;
  for (const auto& r : records) {
    const auto& d = r.data;
    ++runs;
    violations += static_cast<std::int64_t>(r.violations.size());
    bad_seeds += r.violations.empty() ? 0 : 1;
    for (const auto& v : r.violations) ++kinds[v.substr(0, v.find(':'))];
    if (d.contains("corruptions")) max_corr = std::max(max_corr, d["corruptions"].get<int>());
    if (d.contains("contract_ok")) {
      ++contract_n;
      contract += d["contract_ok"].get<bool>() ? 1 : 0;
    }
    if (d.contains("metrics") && d["metrics"].is_object()) {
      const auto& m = d["metrics"];
      h_sum += static_cast<double>(m["h_num"].get<std::int64_t>()) / m["h_den"].get<std::int64_t>();
      ++h_n;
      if (!m["locality"].is_null()) loc_max = std::max(loc_max, m["locality"].get<int>());
      if (!m["cut_weight"].is_null()) {
        const auto w = m["cut_weight"].get<std::int64_t>();
        cut_min = cut_min < 0 ? w : std::min(cut_min, w);
      }
    }
    if (d.contains("attack")) {
      const auto& at = d["attack"];
      p2 += at["phase2"].is_null() ? 0 : 1;
      p3 += at["phase3"].is_null() ? 0 : 1;
      if (!at["failure"].is_null()) ++failures[at["failure"].get<std::string>()];
      if (at["events"].is_object()) {
        ++flagged;
        const bool f1 = at["events"]["e1"].get<bool>(), f2 = at["events"]["e2"].get<bool>();
        e1 += f1;
        e2 += f2;
        e12 += f1 && f2;
        if (f1 && f2 && d.contains("istar_validity")) {
          ++valid_n;
          valid += d["istar_validity"].get<bool>() ? 1 : 0;
        }
      }
    }
    if (d.contains("view")) {
      comparable += d["view"]["comparable"].get<bool>() ? 1 : 0;
      identical += d["view"]["comparable"].get<bool>() && d["view"]["identical"].get<bool>() ? 1 : 0;
    }
    if (d.contains("robust_ok")) {
      ++robust_n;
      const bool ok = d["robust_ok"].get<bool>(), ev = d["supermajority"].get<bool>();
      robust_ok += ok;
      events += ev;
      unexplained += !ok && !ev;
    }
  }
  a["runs"] = runs;
  a["violations"] = violations;
  a["violating_seeds"] = bad_seeds;
  a["violation_kinds"] = kinds;
  a["max_corruptions"] = max_corr;
  a["budget"] = cfg.budget();
  if (contract_n) a["contract"] = {{"ok", contract}, {"runs", contract_n}};
  if (h_n) {
    a["metrics"] = {{"mean_h", h_sum / static_cast<double>(h_n)},
                    {"max_locality", loc_max < 0 ? json(nullptr) : json(loc_max)},
                    {"min_cut_weight", cut_min < 0 ? json(nullptr) : json(cut_min)}};
  }
  if (is_attack(cfg.adversary)) {
    json at;
    at["phase2"] = p2;
    at["phase3"] = p3;
    at["failures"] = failures;
    if (flagged) {
      const auto w12 = wilson_interval(e12, flagged);
      const auto w2 = wilson_interval(e12, e1);
      at["events"] = {{"runs", flagged},
                      {"e1", e1},
                      {"e2", e2},
                      {"e1_and_e2", e12},
                      {"freq_e1_and_e2", static_cast<double>(e12) / static_cast<double>(flagged)},
                      {"wilson_e1_and_e2", {w12.low, w12.high}},
                      {"freq_e2_given_e1", e1 ? json(static_cast<double>(e12) / static_cast<double>(e1)) : json(nullptr)},
                      {"wilson_e2_given_e1", {w2.low, w2.high}}};
    }
    if (valid_n) at["istar_validity"] = {{"ok", valid}, {"runs", valid_n}};
    if (cfg.view_check) at["view"] = {{"comparable", comparable}, {"identical", identical}};
    a["attack"] = at;
  }
  if (robust_n) {
    a["robustness"] = {{"runs", robust_n}, {"ok", robust_ok}, {"supermajority", events}, {"unexplained", unexplained}};
  }
  return a;
}

int Report::violations() const {
  int v = 0;
  for (const auto& r : records) v += static_cast<int>(r.violations.size());
  return v;
}

json Report::to_json() const {
  json recs = json::array();
  for (const auto& r : records) recs.push_back(r.data);
  return {{"config", config.to_json()}, {"records", recs}, {"aggregate", aggregate}};
}

std::string Report::bytes() const { return to_json().dump(1) + "\n"; }

fs::path output_root(const std::optional<std::string>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("COMMLAB_OUT"); env && *env) return env;
  return "out";
}

std::string export_dot(const netsim::Trace& trace, const std::optional<VertexSet>& highlight) {
  const auto g = netsim::build_graphs(trace).full;
  graphkit::DotStyle style;
  style.corrupted = trace.corrupted_final;
  style.name = trace.protocol.empty() ? "G" : trace.protocol;
  for (auto& c : style.name) {
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  }
  if (highlight) {
    style.highlight_side = *highlight;
  } else if (g.n() >= 2) {
    graphkit::CutEnumerator en(g);
    if (auto c = en.next()) style.highlight_side = c->side_s;
  }
  return graphkit::to_dot(g, style);
}

std::optional<VertexSet> default_highlight(const ExperimentConfig& cfg) {
  if (is_committee(cfg.protocol) || cfg.protocol == "strawman") return left_half(cfg.n);
  return std::nullopt;
}

std::string export_metrics_csv(const json& report) {
  std::string out = "seed,h_num,h_den,locality,cut_weight,corruptions\n";
  if (!report.contains("records")) return out;
  auto cell = [](const json& j) -> std::string {
    if (j.is_null()) return "";
    return j.dump();
  };
  for (const auto& r : report["records"]) {
    const json m = r.contains("metrics") ? r["metrics"] : json(nullptr);
    auto get = [&](const char* k) { return m.is_object() && m.contains(k) ? cell(m[k]) : std::string(); };
    out += cell(r["seed"]) + "," + get("h_num") + "," + get("h_den") + "," + get("locality") + "," +
           get("cut_weight") + "," + (r.contains("corruptions") ? cell(r["corruptions"]) : "") + "\n";
  }
  return out;
}

Report run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  validate(cfg);
  if (opts.workers < 1) throw ConfigError("workers must be at least 1");
  Report rep;
  rep.config = cfg;
  const std::uint64_t count = cfg.seeds.size();
  rep.records.resize(count);
  fs::path dir;
  if (opts.out_root) {
    dir = *opts.out_root / cfg.id;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory", dir);
  }
  const auto highlight = default_highlight(cfg);
  std::atomic<std::uint64_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto work = [&] {
    for (;;) {
      const std::uint64_t i = next++;
      if (i >= count) return;
      try {
        auto rec = run_seed(cfg, cfg.seeds.first + i);
        // A seed that errored before the engine finished has no trace to store.
        if (opts.out_root && cfg.artifacts && rec.trace.n > 0) {
          const fs::path sd = dir / std::to_string(rec.seed);
          std::error_code ec;
          fs::create_directories(sd, ec);
          if (ec) throw IoError("cannot create directory", sd);
          write_file(sd / "trace.ndjson", rec.trace.to_ndjson());
          write_file(sd / "graph.dot", export_dot(rec.trace, highlight));
        }
        rec.trace = {};
        rep.records[i] = std::move(rec);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        next = count;
        return;
      }
    }
  };
  const int nworkers = static_cast<int>(std::min<std::uint64_t>(opts.workers, count));
  if (nworkers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nworkers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
  rep.aggregate = aggregate(cfg, rep.records);
  if (opts.out_root) write_file(dir / "report.json", rep.bytes());
  return rep;
}

VerifyResult verify_directory(const fs::path& dir) {
  VerifyResult res;
  const auto report_path = dir / "report.json";
  json report;
  try {
    report = json::parse(read_file(report_path));
  } catch (const json::parse_error& e) {
    throw IoError(std::string("corrupt report (") + e.what() + ")", report_path);
  }
  const auto cfg = config_from_json(report.at("config"));
  std::vector<SeedRecord> recs;
  for (const auto& d : report.at("records")) {
    SeedRecord r;
    r.seed = d.at("seed").get<std::uint64_t>();
    r.data = d;
    r.violations = d.at("violations").get<std::vector<std::string>>();
    const std::string tag = "seed " + std::to_string(r.seed) + ": ";
    for (const auto& v : r.violations) res.problems.push_back(tag + "recorded violation " + v);
    const auto tp = dir / std::to_string(r.seed) / "trace.ndjson";
    if (fs::exists(tp)) {
      ++res.checked_seeds;
      try {
        const auto trace = netsim::Trace::from_ndjson(read_file(tp));
        const int corr = count_corruptions(trace);
        if (d.contains("corruptions") && d["corruptions"].get<int>() != corr) {
          res.problems.push_back(tag + "corruption count differs from the trace");
        }
        if (corr > cfg.budget()) res.problems.push_back(tag + "budget exceeded in trace");
        json metrics = nullptr;
        if (cfg.metrics) {
          metrics = trace_metrics(cfg, trace);
          if (d.contains("metrics") && d["metrics"] != metrics) res.problems.push_back(tag + "metrics differ from the trace");
        }
        if (cfg.adversary == "none" || cfg.adversary == "passive") {
          for (const auto& v : honest_checks(cfg, trace, metrics, cfg.adversary == "none")) {
            res.problems.push_back(tag + v);
          }
        }
      } catch (const std::exception& e) {
        res.problems.push_back(tag + "trace check failed: " + e.what());
      }
    }
    recs.push_back(std::move(r));
  }
  if (aggregate(cfg, recs) != report.at("aggregate")) res.problems.push_back("aggregate does not match the records");
  return res;
}

}  // namespace commlab::harness
