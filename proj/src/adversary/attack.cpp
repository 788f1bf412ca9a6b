#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "commlab/adversary.hpp"

namespace commlab::adversary {

using netsim::EventKind;
using netsim::ExecutionInstance;
using netsim::Trace;

int default_alpha(int n) { return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)) - 1e-9)); }

int degree_threshold(int n, double beta) {
  return std::max(1, static_cast<int>(std::ceil(beta * n / 4.0 - 1e-9)));
}

int island_count_bound(double beta) {
  if (!(beta > 0)) throw std::invalid_argument("beta must be positive");
  return static_cast<int>(std::ceil(8.0 / beta - 1e-9));
}

int budget_of(int n, double beta) { return static_cast<int>(std::floor(beta * n + 1e-9)); }

ResolvedParams resolve(const AttackParams& p, int n) {
  if (n < 2) throw std::invalid_argument("attack needs n >= 2");
  if (!(p.beta > 0 && p.beta <= 1)) throw std::invalid_argument("beta must be in (0, 1]");
  if (p.kappa < 1) throw std::invalid_argument("kappa must be positive");
  ResolvedParams r;
  r.n = n;
  r.beta = p.beta;
  r.budget = budget_of(n, p.beta);
  r.alpha = p.alpha >= 0 ? p.alpha : default_alpha(n);
  r.threshold = p.threshold > 0 ? p.threshold : degree_threshold(n, p.beta);
  r.c = island_count_bound(p.beta);
  r.kappa = p.kappa;
  return r;
}

AttackCoins attack_coins(std::uint64_t seed, int n, int kappa) {
  CoinStream pick = CoinStream(seed, netsim::kAdversaryStream).derive(1);
  AttackCoins a;
  a.istar = static_cast<int>(pick.below(static_cast<std::uint64_t>(n)));
  a.tilde.assign(n, Bytes(kappa));
  for (auto& x : a.tilde) {
    for (auto& b : x) b = pick.bit() ? 1 : 0;
  }
  return a;
}

CoinStream red_virtual_coins(std::uint64_t seed) {
  return CoinStream(seed, netsim::kAdversaryStream).derive(2);
}

CoinStream blue_virtual_coins(std::uint64_t seed, int party) {
  return CoinStream(seed, netsim::kAdversaryStream).derive(0x1000 + static_cast<std::uint64_t>(party));
}

namespace {
ExecutionInstance replay_base(std::shared_ptr<netsim::Protocol> proto, const std::vector<Bytes>& inputs,
                              std::uint64_t seed, int kappa) {
  ExecutionInstance inst;
  inst.protocol = std::move(proto);
  inst.kappa = kappa;
  inst.inputs = inputs;
  inst.seed = seed;
  return inst;
}
}  // namespace

ExecutionInstance red_instance(std::shared_ptr<netsim::Protocol> proto, const std::vector<Bytes>& inputs,
                               std::uint64_t seed, int kappa) {
  const int n = static_cast<int>(inputs.size());
  auto a = attack_coins(seed, n, kappa);
  auto inst = replay_base(std::move(proto), inputs, seed, kappa);
  inst.inputs[a.istar] = a.tilde[a.istar];
  inst.coin_override[a.istar] = red_virtual_coins(seed);
  return inst;
}

ExecutionInstance blue_instance(std::shared_ptr<netsim::Protocol> proto, const std::vector<Bytes>& inputs,
                                std::uint64_t seed, int kappa) {
  const int n = static_cast<int>(inputs.size());
  auto a = attack_coins(seed, n, kappa);
  auto inst = replay_base(std::move(proto), inputs, seed, kappa);
  for (int j = 0; j < n; ++j) {
    if (j == a.istar) continue;
    inst.inputs[j] = a.tilde[j];
    inst.coin_override[j] = blue_virtual_coins(seed, j);
  }
  return inst;
}

std::vector<int> threshold_rounds(const Trace& trace, int threshold) {
  std::vector<int> first(trace.n, -1);
  std::vector<std::set<int>> nbrs(trace.n);
  auto reached = [&](int p, int round) {
    if (first[p] < 0 && static_cast<int>(nbrs[p].size()) >= threshold) first[p] = round;
  };
  if (threshold <= 0) return std::vector<int>(trace.n, 0);
  // Events are logged in round order.
  for (const auto& e : trace.events) {
    const bool edge = (e.kind == EventKind::send && e.honest) || (e.kind == EventKind::processed && e.honest);
    if (!edge || e.party == e.peer) continue;
    nbrs[e.party].insert(e.peer);
    nbrs[e.peer].insert(e.party);
    reached(e.party, e.round);
    reached(e.peer, e.round);
  }
  return first;
}

EventFlags detect_events(const Trace& red, const Trace& blue, int istar, int threshold) {
  const auto rr = threshold_rounds(red, threshold);
  const auto bb = threshold_rounds(blue, threshold);
  EventFlags f;
  f.red_round = rr.at(istar);
  f.blue_round = bb.at(istar);
  auto last = [](const std::vector<int>& r, int mine) {
    if (mine < 0) return false;
    return std::all_of(r.begin(), r.end(), [&](int x) { return x >= 0 && x <= mine; });
  };
  f.e1 = last(rr, f.red_round) && last(bb, f.blue_round);
  f.e2 = f.red_round >= 0 && (f.blue_round < 0 || f.red_round <= f.blue_round);
  return f;
}

FinalCutRecord final_cut(const graphkit::CommGraph& g, std::int64_t alpha) {
  FinalCutRecord r;
  if (g.n() < 2) return r;
  graphkit::CutEnumerator en(g);
  auto c = en.next();
  if (c && c->weight <= alpha) r.cut = *c;
  return r;
}

std::string to_string(Strategy s) {
  return s == Strategy::honest_istar ? "isolate-honest" : "isolate-corrupt";
}

namespace {
nlohmann::json mark_json(const std::optional<PhaseMark>& m) {
  if (!m) return nullptr;
  return {{"round", m->round}, {"message", m->message}};
}
}  // namespace

std::string to_json(const AttackReport& r) {
  using nlohmann::json;
  json j;
  j["strategy"] = to_string(r.strategy);
  j["params"] = {{"n", r.params.n},         {"budget", r.params.budget}, {"alpha", r.params.alpha},
                 {"threshold", r.params.threshold}, {"c", r.params.c}, {"kappa", r.params.kappa},
                 {"beta", r.params.beta}};
  j["istar"] = r.istar;
  j["phase2"] = mark_json(r.phase2);
  j["phase3"] = mark_json(r.phase3);
  j["failure"] = r.failure.empty() ? json(nullptr) : json(r.failure);
  json ledger = json::array();
  for (const auto& e : r.ledger) {
    ledger.push_back({{"party", e.party}, {"round", e.round}, {"phase", e.phase}, {"reason", e.reason}});
  }
  j["ledger"] = ledger;
  j["red_corruptions"] = r.red_corruptions;
  j["blue_corruptions"] = r.blue_corruptions;
  j["max_corruptions"] = r.max_corruptions;
  j["red_degree"] = r.red_degree;
  j["blue_degree"] = r.blue_degree;
  j["real_degree"] = r.real_degree;
  j["gamma1"] = r.gamma1;
  j["gamma2"] = r.gamma2;
  j["merged_island"] = r.merged_island;
  j["merged_edges"] = r.merged_edges;
  j["merge_precondition"] = r.merge_precondition;
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"a", p.a}, {"b", p.b}, {"blocked_edges", p.blocked_edges},
                     {"processed_while_active", p.processed_while_active}});
  }
  j["pairs"] = pairs;
  if (r.flags) {
    j["events"] = {{"e1", r.flags->e1}, {"e2", r.flags->e2}, {"red_round", r.flags->red_round},
                   {"blue_round", r.flags->blue_round}};
  } else {
    j["events"] = nullptr;
  }
  if (!r.final_cut_known) {
    j["final_cut"] = nullptr;
  } else if (!r.final_cut.cut) {
    j["final_cut"] = "none";
  } else {
    j["final_cut"] = {{"side", r.final_cut.cut->side_s}, {"weight", r.final_cut.cut->weight}};
  }
  return j.dump();
}

AttackRun run_attack(const std::string& protocol_id, const protocols::ProtocolParams& pp, Strategy s,
                     const AttackParams& ap, const std::vector<Bytes>& inputs, std::uint64_t seed,
                     bool replays) {
  if (static_cast<int>(inputs.size()) != pp.n) throw std::invalid_argument("inputs do not match n");
  AttackParams params = ap;
  params.kappa = pp.kappa;
  const auto rp = resolve(params, pp.n);
  auto attack = std::make_shared<IsolationAttack>(s, params);
  ExecutionInstance inst;
  inst.protocol = protocols::make_protocol(protocol_id, pp);
  inst.adversary = attack;
  inst.budget = rp.budget;
  inst.kappa = pp.kappa;
  inst.inputs = inputs;
  inst.seed = seed;
  AttackRun run;
  run.trace = netsim::run_instance(inst);
  run.report = attack->report();
  run.report.final_cut = final_cut(netsim::build_graphs(run.trace).full, rp.alpha);
  run.report.final_cut_known = true;
  if (replays) {
    run.red = netsim::run_instance(red_instance(protocols::make_protocol(protocol_id, pp), inputs, seed, pp.kappa));
    run.blue = netsim::run_instance(blue_instance(protocols::make_protocol(protocol_id, pp), inputs, seed, pp.kappa));
    run.report.flags = detect_events(run.red, run.blue, run.report.istar, rp.threshold);
  }
  return run;
}

ViewCheck view_independence_check(const std::string& protocol_id, const protocols::ProtocolParams& pp,
                                  const AttackParams& ap, std::uint64_t seed, const std::vector<Bytes>& x,
                                  const std::vector<Bytes>& x_prime) {
  ViewCheck v;
  const auto a = run_attack(protocol_id, pp, Strategy::corrupt_istar, ap, x, seed, false);
  const auto b = run_attack(protocol_id, pp, Strategy::corrupt_istar, ap, x_prime, seed, false);
  v.istar = a.report.istar;
  for (int p = 0; p < pp.n; ++p) {
    if (p != v.istar && x[p] != x_prime[p]) throw std::invalid_argument("inputs differ outside istar");
  }
  if (!a.report.failure.empty() || !b.report.failure.empty()) {
    v.reason = "attack failed: " + (a.report.failure.empty() ? b.report.failure : a.report.failure);
    return v;
  }
  if (!a.report.phase3 || !b.report.phase3) {
    v.reason = "phase III not reached";
    return v;
  }
  if (a.report.phase2 != b.report.phase2 || a.report.phase3 != b.report.phase3) {
    v.reason = "phase structure differs";
    return v;
  }
  if (!a.report.final_cut.cut || !(a.report.final_cut == b.report.final_cut)) {
    v.reason = !a.report.final_cut.cut ? "no final cut" : "final cuts differ";
    return v;
  }
  v.comparable = true;
  const auto& side = a.report.final_cut.cut->side_s;
  const bool istar_in_s = std::binary_search(side.begin(), side.end(), v.istar);
  for (int p = 0; p < pp.n; ++p) {
    const bool in_s = std::binary_search(side.begin(), side.end(), p);
    if (in_s == istar_in_s) continue;
    if (a.trace.corrupted_at_output[p] || b.trace.corrupted_at_output[p]) continue;
    v.checked.push_back(p);
    if (netsim::party_view(a.trace, p).serialize() != netsim::party_view(b.trace, p).serialize()) {
      v.differing.push_back(p);
    }
  }
  v.identical = v.differing.empty();
  if (v.checked.empty()) v.reason = "no honest party across the cut";
  return v;
}

}  // namespace commlab::adversary
