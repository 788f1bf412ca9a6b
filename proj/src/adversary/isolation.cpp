// Isolation strategies against a chosen party i*.
//
// Phase I runs two executions at once: the red one, in which the real
// parties talk to a virtual P~_i* on a fresh input, and the blue one, in
// which P_i* (real or emulated) talks to virtual Q~_j on fresh inputs.
// Phase II starts once P~_i* has degree T in red; the red graph without i*
// is split into islands and cross-island traffic is blocked. Phase III starts
// once P_i* has degree T in the real execution; i* joins the island it has
// the most edges to.
//
// All i*-adjacent messages of a round are handled one by one in (sender,
// receiver) order, red before blue on ties, and thresholds are checked after
// each of them.
#include <algorithm>
#include <cmath>
#include <set>

#include "commlab/adversary.hpp"

namespace commlab::adversary {

using netsim::AdversaryContext;
using netsim::Incoming;
using netsim::Outgoing;
using netsim::PartyMachine;

namespace {

enum class Kind { real, red_virtual, blue_virtual, istar_blue };

struct Item {
  int from = 0;
  int to = 0;
  int color = 0;  // 0 red or neutral, 1 blue
  Kind kind = Kind::real;
  Bytes payload;  // virtual items only
};

using Edge = std::pair<int, int>;

constexpr int kPlainModelHorizon = 64;

Edge undirected(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::vector<Incoming> filtered(PartyMachine& m, int round, std::vector<Incoming> in) {
  std::sort(in.begin(), in.end(), [](const Incoming& a, const Incoming& b) { return a.from < b.from; });
  std::vector<Incoming> out;
  for (auto& msg : in) {
    if (m.accept(round, msg)) out.push_back(std::move(msg));
  }
  return out;
}

}  // namespace

struct IsolationAttack::State {
  Strategy strategy;
  AttackParams params;
  AttackReport rep;
  int n = 0;
  int istar = 0;
  Phase phase = Phase::I;
  bool passive = false;

  std::unique_ptr<PartyMachine> red;                // P~_i*
  std::vector<std::unique_ptr<PartyMachine>> blue;  // Q~_j; [i*] is P_i*'s emulation (corrupt-i*)

  // Per round.
  Phase phase_at_start = Phase::I;
  std::vector<Outgoing> red_out;
  std::vector<std::vector<Outgoing>> blue_out;
  std::vector<Edge> leaks;
  std::set<Edge> drop_send;
  std::map<Edge, Bytes> set_send;
  std::set<Edge> strip;
  std::map<int, std::vector<Incoming>> inject;
  std::set<int> to_red;   // senders whose message to i* feeds P~
  std::set<int> to_b;     // senders whose message to i* feeds the emulated P_i*
  std::set<int> blue_capture;  // j whose incoming from i* feeds Q~_j
  std::set<Edge> blue_delivered;  // emulated P_i* -> Q~_j, corrupt-i*
  std::vector<Incoming> red_inbox;
  std::vector<std::vector<Incoming>> blue_inbox;
  std::vector<Outgoing> istar_out;  // corrupt-i*: what i* sends this round
  bool istar_out_set = false;

  // Degrees.
  std::set<int> red_nbrs, blue_nbrs, real_nbrs;

  // Red graph without i*, accumulated during Phase I.
  std::set<Edge> red_edges;

  // Islands.
  std::vector<int> island;
  struct PairState {
    std::set<Edge> edges;
    int processed_while_active = 0;
  };
  std::map<Edge, PairState> pairs;

  int threshold() const { return rep.params.threshold; }

  void note(AdversaryContext& ctx, int party, const std::string& reason) {
    rep.ledger.push_back({party, ctx.round(), static_cast<int>(phase), reason});
    if (reason == "red") ++rep.red_corruptions;
    if (reason == "blue") ++rep.blue_corruptions;
    rep.max_corruptions = std::max(rep.max_corruptions, ctx.corruptions());
  }

  void fail(const std::string& why) {
    if (rep.failure.empty()) rep.failure = why;
    passive = true;
  }

  bool ensure_corrupt(AdversaryContext& ctx, int p, const std::string& reason) {
    if (ctx.is_corrupted(p)) return true;
    if (ctx.remaining() <= 0) {
      fail("budget");
      return false;
    }
    ctx.corrupt(p);
    note(ctx, p, reason);
    return true;
  }

  void enter_phase2(int round, int index) {
    phase = Phase::II;
    rep.phase2 = PhaseMark{round, index};
    rep.red_degree = static_cast<int>(red_nbrs.size());
    rep.blue_degree = static_cast<int>(blue_nbrs.size());
    // Partition the red graph without i*, relabelled to 0..n-2.
    auto label = [&](int v) { return v < istar ? v : v - 1; };
    auto unlabel = [&](int v) { return v < istar ? v : v + 1; };
    graphkit::CommGraph g(n - 1);
    for (const auto& [a, b] : red_edges) g.add_edge(label(a), label(b));
    try {
      auto part = graphkit::alpha_d_partition(g, rep.params.alpha, rep.params.c);
      island.assign(n, -1);
      for (std::size_t k = 0; k < part.parts.size(); ++k) {
        VertexSet u;
        for (int v : part.parts[k]) {
          u.push_back(unlabel(v));
          island[unlabel(v)] = static_cast<int>(k);
        }
        rep.gamma1.push_back(u);
      }
    } catch (const graphkit::PreconditionFailure&) {
      fail("partition");
      return;
    }
  }

  void enter_phase3(int round, int index) {
    phase = Phase::III;
    rep.phase3 = PhaseMark{round, index};
    rep.real_degree = static_cast<int>(real_nbrs.size());
    int best = 0, best_edges = -1;
    for (std::size_t k = 0; k < rep.gamma1.size(); ++k) {
      int e = 0;
      for (int v : rep.gamma1[k]) e += real_nbrs.count(v) ? 1 : 0;
      if (e > best_edges) {
        best = static_cast<int>(k);
        best_edges = e;
      }
    }
    rep.merged_island = best;
    rep.merged_edges = best_edges;
    rep.merge_precondition = best_edges > rep.params.alpha;
    island[istar] = best;
    rep.gamma2 = rep.gamma1;
    auto& u = rep.gamma2[best];
    u.insert(std::lower_bound(u.begin(), u.end(), istar), istar);
  }

  void check(int round, int index) {
    if (passive) return;
    if (phase == Phase::I) {
      if (static_cast<int>(red_nbrs.size()) >= threshold()) {
        enter_phase2(round, index);
      } else if (static_cast<int>(blue_nbrs.size()) >= threshold()) {
        rep.red_degree = static_cast<int>(red_nbrs.size());
        rep.blue_degree = static_cast<int>(blue_nbrs.size());
        fail("blue-first");
        return;
      }
    }
    if (phase == Phase::II && !passive && static_cast<int>(real_nbrs.size()) >= threshold()) {
      enter_phase3(round, index);
    }
  }

  bool crosses(int a, int b) const {
    if (phase == Phase::I || passive) return false;
    if (island.empty() || island[a] < 0 || island[b] < 0) return false;
    return island[a] != island[b];
  }

  // Blocks a cross-island message while its island pair is below alpha.
  // Returns true when the message was blocked.
  bool block(AdversaryContext& ctx, int from, int to) {
    const Edge pk = undirected(island[from], island[to]);
    auto& ps = pairs[pk];
    const Edge e = undirected(from, to);
    if (!ps.edges.count(e)) {
      if (static_cast<int>(ps.edges.size()) >= rep.params.alpha) return false;
      ps.edges.insert(e);
    }
    if (ctx.is_corrupted(from)) {
      drop_send.insert({from, to});
      return true;
    }
    if (!ensure_corrupt(ctx, to, "block")) {
      ++ps.processed_while_active;
      return false;
    }
    strip.insert({from, to});
    return true;
  }

  std::vector<Item> collect(AdversaryContext& ctx) {
    std::vector<Item> items;
    for (const auto& [a, b] : leaks) items.push_back({a, b, 0, Kind::real, {}});
    for (int p = 0; p < n; ++p) {
      if (!ctx.is_corrupted(p)) continue;
      if (strategy == Strategy::corrupt_istar && p == istar) continue;
      for (const auto& o : ctx.pending(p)) items.push_back({p, o.to, 0, Kind::real, {}});
    }
    if (phase == Phase::I && !passive) {
      for (const auto& o : red_out) items.push_back({istar, o.to, 0, Kind::red_virtual, o.payload});
      for (int j = 0; j < n; ++j) {
        if (j == istar) continue;
        for (const auto& o : blue_out[j]) {
          if (o.to == istar) items.push_back({j, istar, 1, Kind::blue_virtual, o.payload});
        }
      }
    }
    if (strategy == Strategy::corrupt_istar && !passive) {
      for (const auto& o : blue_out[istar]) {
        items.push_back({istar, o.to, 1, Kind::istar_blue, o.payload});
      }
    }
    // Honest-i* leaks already include i*'s real sends (blue in Phase I).
    for (auto& it : items) {
      if (strategy == Strategy::honest_istar && it.kind == Kind::real && it.from == istar) it.color = 1;
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
      return std::tie(a.from, a.to, a.color) < std::tie(b.from, b.to, b.color);
    });
    return items;
  }

  void handle_honest(AdversaryContext& ctx, const Item& it) {
    const int s = istar;
    if (it.kind == Kind::red_virtual) {
      if (phase != Phase::I) return;
      if (!ensure_corrupt(ctx, it.to, "red")) return;
      strip.insert({s, it.to});
      inject[it.to].push_back({s, it.payload});
      red_nbrs.insert(it.to);
      return;
    }
    if (it.kind == Kind::blue_virtual) {
      if (phase != Phase::I) return;
      if (!ensure_corrupt(ctx, it.from, "blue")) return;
      drop_send.erase({it.from, s});
      set_send[{it.from, s}] = it.payload;
      blue_nbrs.insert(it.from);
      real_nbrs.insert(it.from);
      return;
    }
    // Real messages.
    if (it.to == s) {
      if (phase == Phase::I) {
        if (!ensure_corrupt(ctx, it.from, "red")) return;
        if (!set_send.count({it.from, s})) drop_send.insert({it.from, s});
        to_red.insert(it.from);
        red_nbrs.insert(it.from);
        return;
      }
      if (crosses(it.from, s) && block(ctx, it.from, s)) return;
      real_nbrs.insert(it.from);
      return;
    }
    if (it.from == s) {
      real_nbrs.insert(it.to);
      if (phase == Phase::I) {
        if (!ensure_corrupt(ctx, it.to, "blue")) return;
        strip.insert({s, it.to});
        blue_capture.insert(it.to);
        blue_nbrs.insert(it.to);
        return;
      }
      if (phase == Phase::II) {
        if (!ensure_corrupt(ctx, it.to, "isolate")) return;
        strip.insert({s, it.to});
        return;
      }
      if (crosses(s, it.to)) block(ctx, s, it.to);
      return;
    }
    if (phase == Phase::I) return;
    if (crosses(it.from, it.to)) block(ctx, it.from, it.to);
  }

  void handle_corrupt(AdversaryContext& ctx, const Item& it) {
    const int s = istar;
    if (it.kind == Kind::red_virtual) {
      if (phase != Phase::I) return;
      istar_out.push_back({it.to, it.payload});
      red_nbrs.insert(it.to);
      if (!ctx.is_corrupted(it.to)) real_nbrs.insert(it.to);
      return;
    }
    if (it.kind == Kind::blue_virtual) {
      if (phase != Phase::I) return;
      blue_nbrs.insert(it.from);
      to_b.insert(it.from);  // Q~_j -> emulated P_i*, delivered internally
      return;
    }
    if (it.kind == Kind::istar_blue) {
      if (phase == Phase::I) {
        blue_delivered.insert({s, it.to});
        blue_nbrs.insert(it.to);
        return;
      }
      if (crosses(s, it.to) && block(ctx, s, it.to)) return;
      istar_out.push_back({it.to, it.payload});
      if (!ctx.is_corrupted(it.to)) real_nbrs.insert(it.to);
      return;
    }
    if (it.to == s) {
      if (phase == Phase::I) {
        to_red.insert(it.from);
        red_nbrs.insert(it.from);
        if (!ctx.is_corrupted(it.from)) real_nbrs.insert(it.from);
        return;
      }
      if (crosses(it.from, s) && block(ctx, it.from, s)) return;
      to_b.insert(it.from);
      if (!ctx.is_corrupted(it.from)) real_nbrs.insert(it.from);
      return;
    }
    if (phase == Phase::I) return;
    if (crosses(it.from, it.to)) block(ctx, it.from, it.to);
  }
};

IsolationAttack::IsolationAttack(Strategy s, AttackParams p) : st_(std::make_unique<State>()) {
  st_->strategy = s;
  st_->params = p;
  st_->rep.strategy = s;
}

IsolationAttack::~IsolationAttack() = default;

std::string IsolationAttack::id() const { return to_string(st_->strategy); }
const AttackReport& IsolationAttack::report() const { return st_->rep; }
Phase IsolationAttack::phase() const { return st_->phase; }

void IsolationAttack::start(AdversaryContext& ctx) {
  auto& s = *st_;
  auto& proto = ctx.protocol();
  // Virtual parties have no access to functionalities or private setup.
  for (int r = 0; r < kPlainModelHorizon; ++r) {
    if (!proto.ideal_calls(r).empty()) throw std::invalid_argument("isolation attack needs a plain-model protocol");
  }
  for (int p = 0; p < ctx.n(); ++p) {
    if (!proto.setup_string(p).empty()) throw std::invalid_argument("isolation attack needs a protocol without setup");
  }
  s.n = ctx.n();
  s.rep.params = resolve(s.params, s.n);
  if (ctx.budget() < s.rep.params.budget) s.rep.params.budget = ctx.budget();
  // Same derivation as attack_coins(seed, ...), via the adversary stream.
  CoinStream pick = ctx.coins().derive(1);
  s.istar = static_cast<int>(pick.below(static_cast<std::uint64_t>(s.n)));
  std::vector<Bytes> tilde(s.n, Bytes(s.params.kappa));
  for (auto& x : tilde) {
    for (auto& b : x) b = pick.bit() ? 1 : 0;
  }
  s.rep.istar = s.istar;
  s.red = proto.make_party(s.istar, tilde[s.istar], ctx.coins().derive(2));
  s.blue.resize(s.n);
  s.blue_inbox.resize(s.n);
  for (int j = 0; j < s.n; ++j) {
    if (j == s.istar) continue;
    s.blue[j] = proto.make_party(j, tilde[j], ctx.coins().derive(0x1000 + static_cast<std::uint64_t>(j)));
  }
  if (s.strategy == Strategy::corrupt_istar) {
    ctx.corrupt(s.istar);
    s.note(ctx, s.istar, "istar");
    s.blue[s.istar] = proto.make_party(s.istar, ctx.input(s.istar), ctx.party_coins(s.istar));
  }
}

void IsolationAttack::round_begin(AdversaryContext&, int round) {
  auto& s = *st_;
  s.phase_at_start = s.phase;
  s.red_out.clear();
  s.blue_out.assign(s.n, {});
  s.leaks.clear();
  s.drop_send.clear();
  s.set_send.clear();
  s.strip.clear();
  s.inject.clear();
  s.to_red.clear();
  s.to_b.clear();
  s.blue_capture.clear();
  s.blue_delivered.clear();
  s.red_inbox.clear();
  for (auto& b : s.blue_inbox) b.clear();
  s.istar_out.clear();
  s.istar_out_set = false;
  if (s.passive) return;
  if (s.phase == Phase::I) {
    s.red_out = s.red->send(round);
    for (int j = 0; j < s.n; ++j) {
      if (s.blue[j] && j != s.istar) s.blue_out[j] = s.blue[j]->send(round);
    }
  }
  if (s.strategy == Strategy::corrupt_istar) s.blue_out[s.istar] = s.blue[s.istar]->send(round);
}

void IsolationAttack::on_leak(AdversaryContext&, const netsim::Leak& leak) {
  st_->leaks.push_back({leak.from, leak.to});
}

void IsolationAttack::input_end(AdversaryContext& ctx, int round) {
  auto& s = *st_;
  if (s.passive) return;
  auto items = s.collect(ctx);
  if (s.phase == Phase::I) {
    for (const auto& it : items) {
      if (it.from != s.istar && it.to != s.istar && it.kind == Kind::real) {
        s.red_edges.insert(undirected(it.from, it.to));
      }
    }
  }
  const bool corrupt_mode = s.strategy == Strategy::corrupt_istar;
  if (corrupt_mode) s.istar_out_set = true;
  std::size_t k = 0;
  for (; k < items.size() && !s.passive; ++k) {
    if (corrupt_mode) s.handle_corrupt(ctx, items[k]);
    else s.handle_honest(ctx, items[k]);
    const bool adjacent = items[k].from == s.istar || items[k].to == s.istar;
    if (adjacent) s.check(round, static_cast<int>(k));
  }
  if (corrupt_mode && s.passive) {
    // The rest of the round follows the source current at the failure.
    for (; k < items.size(); ++k) {
      const auto& it = items[k];
      const bool mine = (s.phase == Phase::I && it.kind == Kind::red_virtual) ||
                        (s.phase != Phase::I && it.kind == Kind::istar_blue);
      if (mine) s.istar_out.push_back({it.to, it.payload});
    }
  }
}

void IsolationAttack::corrupted_sends(AdversaryContext&, int, int party, std::vector<Outgoing>& out) {
  auto& s = *st_;
  if (s.strategy == Strategy::corrupt_istar && party == s.istar && s.istar_out_set) {
    std::vector<Outgoing> v;
    for (auto& o : s.istar_out) {
      if (!s.drop_send.count({party, o.to})) v.push_back(o);
    }
    std::stable_sort(v.begin(), v.end(), [](const Outgoing& a, const Outgoing& b) { return a.to < b.to; });
    // A later item for the same receiver wins.
    std::vector<Outgoing> dedup;
    for (auto& o : v) {
      if (!dedup.empty() && dedup.back().to == o.to) dedup.back() = o;
      else dedup.push_back(o);
    }
    out = std::move(dedup);
    return;
  }
  std::vector<Outgoing> v;
  for (auto& o : out) {
    const Edge e{party, o.to};
    if (o.to == s.istar && s.to_red.count(party)) s.red_inbox.push_back({party, o.payload});
    auto rep = s.set_send.find(e);
    if (rep != s.set_send.end()) {
      v.push_back({o.to, rep->second});
      continue;
    }
    if (s.drop_send.count(e)) continue;
    v.push_back(std::move(o));
  }
  for (const auto& [e, payload] : s.set_send) {
    if (e.first != party) continue;
    bool present = std::any_of(v.begin(), v.end(), [&](const Outgoing& o) { return o.to == e.second; });
    if (!present) v.push_back({e.second, payload});
  }
  std::stable_sort(v.begin(), v.end(), [](const Outgoing& a, const Outgoing& b) { return a.to < b.to; });
  out = std::move(v);
}

void IsolationAttack::corrupted_receive(AdversaryContext&, int, int party, std::vector<Incoming>& in) {
  auto& s = *st_;
  std::vector<Incoming> v;
  const bool is_emulated = s.strategy == Strategy::corrupt_istar && party == s.istar;
  for (auto& m : in) {
    const Edge e{m.from, party};
    if (is_emulated) {
      if (s.to_red.count(m.from)) s.red_inbox.push_back(m);
      else if (s.to_b.count(m.from) && s.blue[s.istar]) s.blue_inbox[s.istar].push_back(m);
      continue;
    }
    if (m.from == s.istar && s.blue_capture.count(party)) s.blue_inbox[party].push_back({s.istar, m.payload});
    if (s.strip.count(e)) continue;
    v.push_back(std::move(m));
  }
  auto inj = s.inject.find(party);
  if (inj != s.inject.end()) {
    for (const auto& m : inj->second) {
      v.erase(std::remove_if(v.begin(), v.end(), [&](const Incoming& x) { return x.from == m.from; }),
              v.end());
      v.push_back(m);
    }
  }
  std::stable_sort(v.begin(), v.end(), [](const Incoming& a, const Incoming& b) { return a.from < b.from; });
  in = std::move(v);
}

void IsolationAttack::round_end(AdversaryContext& ctx, int round) {
  auto& s = *st_;
  (void)ctx;
  if (s.phase_at_start == Phase::I && s.red) {
    s.red->receive(round, filtered(*s.red, round, s.red_inbox));
  }
  // Blue execution.
  std::vector<std::vector<Incoming>> box(s.n);
  if (s.phase_at_start == Phase::I) {
    for (int j = 0; j < s.n; ++j) {
      if (j == s.istar) continue;
      for (const auto& o : s.blue_out[j]) {
        if (o.to != s.istar) box[o.to].push_back({j, o.payload});
      }
    }
    for (int j = 0; j < s.n; ++j) {
      for (auto& m : s.blue_inbox[j]) {
        if (j != s.istar) box[j].push_back(m);
      }
    }
  }
  if (s.strategy == Strategy::corrupt_istar && s.blue[s.istar]) {
    for (const auto& o : s.blue_out[s.istar]) {
      if (s.blue_delivered.count({s.istar, o.to})) box[o.to].push_back({s.istar, o.payload});
    }
    for (int j = 0; j < s.n; ++j) {
      if (j == s.istar || !s.to_b.count(j)) continue;
      // Q~_j's message in Phase I, the real one afterwards.
      for (const auto& o : s.blue_out[j]) {
        if (o.to == s.istar) box[s.istar].push_back({j, o.payload});
      }
    }
    for (auto& m : s.blue_inbox[s.istar]) {
      bool dup = std::any_of(box[s.istar].begin(), box[s.istar].end(),
                             [&](const Incoming& x) { return x.from == m.from; });
      if (!dup) box[s.istar].push_back(m);
    }
  }
  for (int j = 0; j < s.n; ++j) {
    if (!s.blue[j]) continue;
    const bool emulated = j == s.istar;
    if (!emulated && s.phase_at_start != Phase::I) continue;
    s.blue[j]->receive(round, filtered(*s.blue[j], round, box[j]));
  }
  s.rep.max_corruptions = std::max(s.rep.max_corruptions, ctx.corruptions());
  s.rep.pairs.clear();
  for (const auto& [key, ps] : s.pairs) {
    s.rep.pairs.push_back({key.first, key.second, static_cast<int>(ps.edges.size()),
                           ps.processed_while_active});
  }
}

}  // namespace commlab::adversary
