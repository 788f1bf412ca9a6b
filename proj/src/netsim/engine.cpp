#include <algorithm>

#include "commlab/netsim.hpp"

namespace commlab::netsim {

std::string to_string(ChannelModel m) {
  switch (m) {
    case ChannelModel::secure: return "secure";
    case ChannelModel::authenticated: return "authenticated";
    case ChannelModel::hidden: return "hidden";
  }
  return "?";
}

std::string to_string(HonestyRule r) {
  return r == HonestyRule::at_event ? "at_event" : "at_output";
}

std::string to_string(IdealMode m) { return m == IdealMode::oracle ? "oracle" : "clique"; }

ChannelModel parse_channel(const std::string& s) {
  if (s == "secure") return ChannelModel::secure;
  if (s == "authenticated") return ChannelModel::authenticated;
  if (s == "hidden") return ChannelModel::hidden;
  throw std::invalid_argument("unknown channel mode: " + s);
}

HonestyRule parse_honesty(const std::string& s) {
  if (s == "at_event") return HonestyRule::at_event;
  if (s == "at_output") return HonestyRule::at_output;
  throw std::invalid_argument("unknown honesty rule: " + s);
}

IdealMode parse_ideal_mode(const std::string& s) {
  if (s == "oracle") return IdealMode::oracle;
  if (s == "clique") return IdealMode::clique;
  throw std::invalid_argument("unknown ideal mode: " + s);
}

std::string to_string(Subphase s) {
  switch (s) {
    case Subphase::setup: return "setup";
    case Subphase::ideal: return "ideal";
    case Subphase::input: return "input";
    case Subphase::output: return "output";
    case Subphase::post: return "post";
  }
  return "?";
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::send: return "send";
    case EventKind::filter_drop: return "filter_drop";
    case EventKind::processed: return "processed";
    case EventKind::corrupt: return "corrupt";
    case EventKind::ideal_output: return "ideal_output";
    case EventKind::output: return "output";
  }
  return "?";
}

std::map<int, Bytes> Protocol::run_functionality(const std::string& fid, int,
                                                 const std::map<int, std::optional<Bytes>>&,
                                                 CoinStream&) {
  throw std::logic_error("protocol " + id() + " has no functionality " + fid);
}

CoinStream party_coins(std::uint64_t seed, int party) {
  return CoinStream(seed, static_cast<std::uint64_t>(party));
}

std::uint64_t coin_fingerprint(std::uint64_t seed, int party) {
  CoinStream c = party_coins(seed, party);
  return c.next_u64();
}

std::vector<Incoming> receive_filter(PartyMachine& receiver, int receiver_id, int round,
                                     const std::vector<Incoming>& incoming, bool honest,
                                     std::vector<Event>& log) {
  std::vector<Incoming> kept;
  for (const auto& msg : incoming) {
    bool ok = receiver.accept(round, msg);
    if (honest) {
      Event e;
      e.kind = ok ? EventKind::processed : EventKind::filter_drop;
      e.round = round;
      e.phase = Subphase::output;
      e.party = receiver_id;
      e.peer = msg.from;
      e.honest = true;
      if (!ok) e.note = "filter";
      log.push_back(std::move(e));
    }
    if (ok) kept.push_back(msg);
  }
  return kept;
}

class Engine {
 public:
  Engine(int n, int budget, ChannelModel channel, Adversary* adv, Protocol* proto,
         std::uint64_t seed, std::vector<Event>& log)
      : n_(n),
        budget_(budget),
        channel_(channel),
        adv_(adv),
        proto_(proto),
        corrupted_(n, false),
        log_(log),
        adv_coins_(seed, kAdversaryStream) {}

  int n_;
  int budget_;
  ChannelModel channel_;
  Adversary* adv_;
  Protocol* proto_;
  std::vector<bool> corrupted_;
  int corruptions_ = 0;
  int round_ = 0;
  Subphase phase_ = Subphase::setup;
  std::vector<Event>& log_;
  std::vector<std::vector<Outgoing>> pending_;
  std::vector<Bytes> inputs_;
  std::vector<CoinStream> party_coins_;
  CoinStream adv_coins_;

  void check_party(int p) const {
    if (p < 0 || p >= n_) throw std::out_of_range("party index " + std::to_string(p));
  }

  void corrupt(int p, const std::string& by) {
    check_party(p);
    if (corrupted_[p]) return;
    if (corruptions_ >= budget_) {
      throw BudgetExceeded("corruption #" + std::to_string(corruptions_ + 1) + " exceeds budget " +
                           std::to_string(budget_));
    }
    corrupted_[p] = true;
    ++corruptions_;
    Event e;
    e.kind = EventKind::corrupt;
    e.round = round_;
    e.phase = phase_;
    e.party = p;
    e.honest = false;
    e.note = by;
    log_.push_back(std::move(e));
  }

  void replace(int from, int to, std::optional<Bytes> payload) {
    check_party(from);
    check_party(to);
    if (!corrupted_[from]) {
      throw ProtocolViolation("replacing a message of uncorrupted party " + std::to_string(from));
    }
    if (pending_.empty()) throw ProtocolViolation("no round in progress");
    auto& out = pending_[from];
    auto it = std::find_if(out.begin(), out.end(), [&](const Outgoing& o) { return o.to == to; });
    if (!payload) {
      if (it != out.end()) out.erase(it);
    } else if (it != out.end()) {
      it->payload = std::move(*payload);
    } else {
      out.push_back({to, std::move(*payload)});
      normalise(out);
    }
  }

  void normalise(std::vector<Outgoing>& out) const {
    std::stable_sort(out.begin(), out.end(),
                     [](const Outgoing& a, const Outgoing& b) { return a.to < b.to; });
    for (std::size_t k = 0; k < out.size(); ++k) {
      check_party(out[k].to);
      if (k > 0 && out[k].to == out[k - 1].to) {
        throw std::logic_error("two messages to party " + std::to_string(out[k].to) +
                               " in one round");
      }
    }
  }

  // Input phase of one parallel-SMT round: leakage, corruption window,
  // replacement. Leaves the final vectors in pending_ and logs the sends.
  void input_phase(std::vector<std::vector<Outgoing>> sends) {
    phase_ = Subphase::input;
    pending_ = std::move(sends);
    pending_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      for (const auto& o : pending_[i]) {
        if (o.to == i) throw std::logic_error("party sends to itself");
      }
      normalise(pending_[i]);
    }
    if (adv_) {
      AdversaryContext ctx(*this);
      for (int i = 0; i < n_; ++i) {
        if (corrupted_[i]) continue;
        for (std::size_t k = 0; k < pending_[i].size() && !corrupted_[i]; ++k) {
          const int j = pending_[i][k].to;
          const Bytes copy = pending_[i][k].payload;
          Leak lk;
          lk.round = round_;
          lk.from = i;
          lk.to = j;
          lk.length = copy.size();
          switch (channel_) {
            case ChannelModel::secure:
              if (corrupted_[j]) lk.content = &copy;
              break;
            case ChannelModel::authenticated:
              lk.content = &copy;
              break;
            case ChannelModel::hidden:
              if (!corrupted_[j]) continue;
              lk.content = &copy;
              break;
          }
          adv_->on_leak(ctx, lk);
        }
      }
      adv_->input_end(ctx, round_);
      for (int i = 0; i < n_; ++i) {
        if (!corrupted_[i]) continue;
        adv_->corrupted_sends(ctx, round_, i, pending_[i]);
        for (const auto& o : pending_[i]) {
          if (o.to == i) throw ProtocolViolation("corrupted party sends to itself");
        }
        normalise(pending_[i]);
      }
    }
    for (int i = 0; i < n_; ++i) {
      for (const auto& o : pending_[i]) {
        Event e;
        e.kind = EventKind::send;
        e.round = round_;
        e.phase = Subphase::input;
        e.party = i;
        e.peer = o.to;
        e.payload = o.payload;
        e.honest = !corrupted_[i];
        log_.push_back(std::move(e));
      }
    }
  }

  std::vector<Incoming> incoming_for(int j) const {
    std::vector<Incoming> in;
    for (int i = 0; i < n_; ++i) {
      for (const auto& o : pending_[i]) {
        if (o.to == j) in.push_back({i, o.payload});
      }
    }
    return in;
  }

  // Output phase hook for a corrupted receiver.
  void adversary_receive(int j, std::vector<Incoming>& in) {
    if (!adv_) return;
    AdversaryContext ctx(*this);
    adv_->corrupted_receive(ctx, round_, j, in);
    for (const auto& m : in) check_party(m.from);
  }
};

int AdversaryContext::n() const { return engine_.n_; }
int AdversaryContext::round() const { return engine_.round_; }
Subphase AdversaryContext::phase() const { return engine_.phase_; }
int AdversaryContext::budget() const { return engine_.budget_; }
int AdversaryContext::corruptions() const { return engine_.corruptions_; }
bool AdversaryContext::is_corrupted(int party) const {
  engine_.check_party(party);
  return engine_.corrupted_[party];
}
void AdversaryContext::corrupt(int party) {
  engine_.corrupt(party, engine_.phase_ == Subphase::post ? "post-execution" : "adversary");
}
const std::vector<Outgoing>& AdversaryContext::pending(int party) const {
  engine_.check_party(party);
  if (!engine_.corrupted_[party]) {
    throw ProtocolViolation("reading pending messages of uncorrupted party " +
                            std::to_string(party));
  }
  static const std::vector<Outgoing> kNone;
  if (engine_.pending_.empty()) return kNone;
  return engine_.pending_[party];
}
void AdversaryContext::replace(int from, int to, std::optional<Bytes> payload) {
  if (engine_.phase_ != Subphase::input) {
    throw ProtocolViolation("messages can only be replaced in the input phase");
  }
  engine_.replace(from, to, std::move(payload));
}
const Bytes& AdversaryContext::input(int party) const {
  engine_.check_party(party);
  if (!engine_.corrupted_[party]) {
    throw ProtocolViolation("reading input of uncorrupted party " + std::to_string(party));
  }
  return engine_.inputs_.at(party);
}
CoinStream AdversaryContext::party_coins(int party) const {
  engine_.check_party(party);
  if (!engine_.corrupted_[party]) {
    throw ProtocolViolation("reading coins of uncorrupted party " + std::to_string(party));
  }
  return engine_.party_coins_.at(party);
}
CoinStream& AdversaryContext::coins() { return engine_.adv_coins_; }
Protocol& AdversaryContext::protocol() {
  if (!engine_.proto_) throw std::logic_error("no protocol attached");
  return *engine_.proto_;
}
ChannelModel AdversaryContext::channel() const { return engine_.channel_; }

PsmtResult psmt_round(int round, std::vector<std::vector<Outgoing>> sends, ChannelModel channel,
                      std::vector<bool> corrupted, int budget, Adversary* adv) {
  PsmtResult res;
  const int n = static_cast<int>(sends.size());
  Engine eng(n, budget, channel, adv, nullptr, 0, res.events);
  eng.round_ = round;
  for (int p = 0; p < n && p < static_cast<int>(corrupted.size()); ++p) {
    if (corrupted[p]) {
      eng.corrupted_[p] = true;
      ++eng.corruptions_;
    }
  }
  if (eng.corruptions_ > budget) throw BudgetExceeded("initial corrupted set exceeds budget");
  eng.input_phase(std::move(sends));
  eng.phase_ = Subphase::output;
  res.delivered.resize(n);
  for (int j = 0; j < n; ++j) {
    res.delivered[j] = eng.incoming_for(j);
    if (eng.corrupted_[j]) eng.adversary_receive(j, res.delivered[j]);
  }
  res.corrupted = eng.corrupted_;
  return res;
}

Trace run_instance(const ExecutionInstance& inst) {
  if (!inst.protocol) throw std::invalid_argument("run_instance: no protocol");
  Protocol& proto = *inst.protocol;
  const int n = proto.n();
  if (n < 1) throw std::invalid_argument("run_instance: n must be positive");
  if (inst.kappa < 1) throw std::invalid_argument("run_instance: kappa must be positive");
  if (static_cast<int>(inst.inputs.size()) != n) {
    throw std::invalid_argument("run_instance: input vector has " +
                                std::to_string(inst.inputs.size()) + " entries, n = " +
                                std::to_string(n));
  }
  if (inst.budget < static_cast<int>(inst.static_corrupt.size())) {
    throw std::invalid_argument("run_instance: static corrupted set larger than budget");
  }

  Trace tr;
  tr.n = n;
  tr.protocol = proto.id();
  tr.adversary = inst.adversary ? inst.adversary->id() : "none";
  tr.channel = inst.channel;
  tr.honesty = inst.honesty;
  tr.seed = inst.seed;
  tr.budget = inst.budget;
  tr.inputs = inst.inputs;

  Engine eng(n, inst.budget, inst.channel, inst.adversary.get(), &proto, inst.seed, tr.events);
  eng.inputs_ = inst.inputs;
  AdversaryContext ctx(eng);

  CoinStream setup_coins(inst.seed, kSetupStream);
  proto.setup(setup_coins);
  std::vector<std::unique_ptr<PartyMachine>> machines;
  for (int p = 0; p < n; ++p) {
    tr.setup.push_back(proto.setup_string(p));
    auto ov = inst.coin_override.find(p);
    CoinStream coins = ov != inst.coin_override.end() ? ov->second : party_coins(inst.seed, p);
    tr.coin_ids.push_back(CoinStream(coins).next_u64());
    eng.party_coins_.push_back(coins);
    machines.push_back(proto.make_party(p, inst.inputs[p], coins));
  }
  for (int p : inst.static_corrupt) eng.corrupt(p, "static");
  Adversary* adv = inst.adversary.get();
  if (adv) adv->start(ctx);

  CoinStream func_coins(inst.seed, kFunctionalityStream);
  auto all_done = [&] {
    bool any_honest = false;
    for (int p = 0; p < n; ++p) {
      if (eng.corrupted_[p]) continue;
      any_honest = true;
      if (!machines[p]->finished()) return false;
    }
    if (any_honest) return true;
    for (const auto& m : machines) {
      if (!m->finished()) return false;
    }
    return true;
  };

  int round = 0;
  for (; !all_done(); ++round) {
    if (round >= inst.max_rounds) {
      throw RunawayProtocol("protocol " + proto.id() + " still running after " +
                            std::to_string(inst.max_rounds) + " rounds");
    }
    eng.round_ = round;
    eng.phase_ = Subphase::ideal;
    eng.pending_.clear();
    if (adv) adv->round_begin(ctx, round);

    for (const auto& call : proto.ideal_calls(round)) {
      std::map<int, std::optional<Bytes>> ins;
      for (int p : call.participants) {
        eng.check_party(p);
        auto in = machines[p]->ideal_input(round, call.fid);
        if (eng.corrupted_[p] && adv) in = adv->ideal_input(ctx, round, call.fid, p, std::move(in));
        ins[p] = std::move(in);
      }
      auto outs = proto.run_functionality(call.fid, round, ins, func_coins);
      if (inst.ideal_mode == IdealMode::clique) {
        for (int a : call.participants) {
          for (int b : call.participants) {
            if (a == b) continue;
            Event e;
            e.kind = EventKind::send;
            e.round = round;
            e.phase = Subphase::ideal;
            e.party = a;
            e.peer = b;
            e.honest = !eng.corrupted_[a];
            e.ideal = true;
            e.note = call.fid;
            tr.events.push_back(std::move(e));
          }
        }
        for (int b : call.participants) {
          if (eng.corrupted_[b]) continue;
          for (int a : call.participants) {
            if (a == b) continue;
            Event e;
            e.kind = EventKind::processed;
            e.round = round;
            e.phase = Subphase::ideal;
            e.party = b;
            e.peer = a;
            e.ideal = true;
            e.note = call.fid;
            tr.events.push_back(std::move(e));
          }
        }
      }
      for (auto& [p, out] : outs) {
        eng.check_party(p);
        Event e;
        e.kind = EventKind::ideal_output;
        e.round = round;
        e.phase = Subphase::ideal;
        e.party = p;
        e.payload = out;
        e.honest = !eng.corrupted_[p];
        e.note = call.fid;
        tr.events.push_back(std::move(e));
        machines[p]->ideal_output(round, call.fid, out);
        if (eng.corrupted_[p] && adv) adv->ideal_output(ctx, round, call.fid, p, out);
      }
    }

    std::vector<std::vector<Outgoing>> sends(n);
    for (int p = 0; p < n; ++p) sends[p] = machines[p]->send(round);
    eng.input_phase(std::move(sends));

    eng.phase_ = Subphase::output;
    for (int j = 0; j < n; ++j) {
      auto in = eng.incoming_for(j);
      if (eng.corrupted_[j]) {
        eng.adversary_receive(j, in);
        std::vector<Event> silent;
        machines[j]->receive(round, receive_filter(*machines[j], j, round, in, false, silent));
      } else {
        machines[j]->receive(round, receive_filter(*machines[j], j, round, in, true, tr.events));
      }
    }
    if (adv) adv->round_end(ctx, round);
    eng.pending_.clear();
  }

  tr.rounds = round;
  eng.round_ = round;
  eng.phase_ = Subphase::output;
  tr.outputs.resize(n);
  for (int p = 0; p < n; ++p) {
    if (eng.corrupted_[p]) continue;
    tr.outputs[p] = machines[p]->output();
    Event e;
    e.kind = EventKind::output;
    e.round = round;
    e.phase = Subphase::output;
    e.party = p;
    if (tr.outputs[p]) e.payload = *tr.outputs[p];
    else e.note = "none";
    tr.events.push_back(std::move(e));
  }
  tr.corrupted_at_output = eng.corrupted_;
  eng.phase_ = Subphase::post;
  if (adv) adv->post_execution(ctx);
  tr.corrupted_final = eng.corrupted_;
  return tr;
}

}  // namespace commlab::netsim
