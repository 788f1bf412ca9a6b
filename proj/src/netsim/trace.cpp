#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "commlab/netsim.hpp"

namespace commlab::netsim {

using nlohmann::json;

std::string hex(const Bytes& b) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(2 * b.size());
  for (auto c : b) {
    s.push_back(digits[c >> 4]);
    s.push_back(digits[c & 15]);
  }
  return s;
}

Bytes unhex(const std::string& s) {
  if (s.size() % 2) throw std::invalid_argument("unhex: odd length");
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("unhex: bad digit");
  };
  Bytes b(s.size() / 2);
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] = static_cast<std::uint8_t>(nib(s[2 * i]) << 4 | nib(s[2 * i + 1]));
  }
  return b;
}

namespace {

EventKind parse_kind(const std::string& s) {
  for (auto k : {EventKind::send, EventKind::filter_drop, EventKind::processed, EventKind::corrupt,
                 EventKind::ideal_output, EventKind::output}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown event kind: " + s);
}

Subphase parse_phase(const std::string& s) {
  for (auto p : {Subphase::setup, Subphase::ideal, Subphase::input, Subphase::output,
                 Subphase::post}) {
    if (to_string(p) == s) return p;
  }
  throw std::invalid_argument("unknown sub-phase: " + s);
}

json hex_list(const std::vector<Bytes>& v) {
  json a = json::array();
  for (const auto& b : v) a.push_back(hex(b));
  return a;
}

}  // namespace

std::string Trace::to_ndjson() const {
  std::ostringstream os;
  json head = {{"type", "header"},
               {"n", n},
               {"protocol", protocol},
               {"adversary", adversary},
               {"channel", to_string(channel)},
               {"honesty", to_string(honesty)},
               {"seed", seed},
               {"rounds", rounds},
               {"budget", budget},
               {"inputs", hex_list(inputs)},
               {"setup", hex_list(setup)},
               {"coins", coin_ids}};
  os << head.dump() << '\n';
  for (const auto& e : events) {
    json j = {{"type", to_string(e.kind)},
              {"round", e.round},
              {"phase", to_string(e.phase)},
              {"party", e.party},
              {"peer", e.peer},
              {"length", e.payload.size()},
              {"payload", hex(e.payload)},
              {"honest", e.honest}};
    if (e.ideal) j["ideal"] = true;
    if (!e.note.empty()) j["note"] = e.note;
    os << j.dump() << '\n';
  }
  json outs = json::array();
  for (const auto& o : outputs) outs.push_back(o ? json(hex(*o)) : json(nullptr));
  json fin = {{"type", "final"},
              {"outputs", outs},
              {"corrupted_at_output", corrupted_at_output},
              {"corrupted_final", corrupted_final}};
  os << fin.dump() << '\n';
  return os.str();
}

Trace Trace::from_ndjson(const std::string& text) {
  Trace tr;
  std::istringstream is(text);
  std::string line;
  bool header = false, final = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    const std::string type = j.at("type");
    if (type == "header") {
      tr.n = j.at("n");
      tr.protocol = j.at("protocol");
      tr.adversary = j.at("adversary");
      tr.channel = parse_channel(j.at("channel"));
      tr.honesty = parse_honesty(j.at("honesty"));
      tr.seed = j.at("seed");
      tr.rounds = j.at("rounds");
      tr.budget = j.at("budget");
      for (const auto& h : j.at("inputs")) tr.inputs.push_back(unhex(h));
      for (const auto& h : j.at("setup")) tr.setup.push_back(unhex(h));
      tr.coin_ids = j.at("coins").get<std::vector<std::uint64_t>>();
      header = true;
    } else if (type == "final") {
      for (const auto& o : j.at("outputs")) {
        tr.outputs.push_back(o.is_null() ? std::nullopt : std::optional<Bytes>(unhex(o)));
      }
      tr.corrupted_at_output = j.at("corrupted_at_output").get<std::vector<bool>>();
      tr.corrupted_final = j.at("corrupted_final").get<std::vector<bool>>();
      final = true;
    } else {
      Event e;
      e.kind = parse_kind(type);
      e.round = j.at("round");
      e.phase = parse_phase(j.at("phase"));
      e.party = j.at("party");
      e.peer = j.at("peer");
      e.payload = unhex(j.at("payload"));
      e.honest = j.at("honest");
      e.ideal = j.value("ideal", false);
      e.note = j.value("note", "");
      tr.events.push_back(std::move(e));
    }
  }
  if (!header || !final) throw std::invalid_argument("trace: missing header or final record");
  return tr;
}

std::vector<bool> honest_parties(const Trace& trace) {
  std::vector<bool> h(trace.n, true);
  for (int p = 0; p < trace.n && p < static_cast<int>(trace.corrupted_at_output.size()); ++p) {
    h[p] = !trace.corrupted_at_output[p];
  }
  return h;
}

CommGraphs build_graphs(const Trace& trace) { return build_graphs(trace, trace.honesty); }

CommGraphs build_graphs(const Trace& trace, HonestyRule rule) {
  CommGraphs g;
  g.out.n = g.in.n = trace.n;
  g.full = graphkit::CommGraph(trace.n);
  const auto honest = honest_parties(trace);
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::send) {
      bool h = rule == HonestyRule::at_event ? e.honest : honest[e.party];
      if (h) g.out.arcs.emplace(e.party, e.peer);
    } else if (e.kind == EventKind::processed) {
      bool h = rule == HonestyRule::at_event ? e.honest : honest[e.party];
      if (h) g.in.arcs.emplace(e.peer, e.party);
    }
  }
  for (const auto& [a, b] : g.out.arcs) g.full.add_edge(a, b);
  for (const auto& [a, b] : g.in.arcs) g.full.add_edge(a, b);
  return g;
}

Locality locality(const Trace& trace) {
  const auto g = build_graphs(trace);
  const auto honest = honest_parties(trace);
  std::vector<std::set<int>> nb(trace.n);
  for (const auto& [i, j] : g.out.arcs) nb[i].insert(j);
  for (const auto& [j, i] : g.in.arcs) nb[i].insert(j);
  Locality loc;
  loc.per_party.assign(trace.n, -1);
  bool any = false;
  for (int p = 0; p < trace.n; ++p) {
    if (!honest[p]) continue;
    any = true;
    loc.per_party[p] = static_cast<int>(nb[p].size());
    loc.max = std::max(loc.max, loc.per_party[p]);
  }
  if (!any) throw UndefinedLocality("every party is corrupted");
  return loc;
}

PartyView party_view(const Trace& trace, int party) {
  if (party < 0 || party >= trace.n) throw std::out_of_range("party_view: bad party");
  PartyView v;
  v.party = party;
  v.input = trace.inputs.at(party);
  v.coins = trace.coin_ids.at(party);
  v.setup = trace.setup.at(party);
  v.rounds.resize(trace.rounds);
  for (int r = 0; r < trace.rounds; ++r) v.rounds[r].round = r;
  std::map<std::tuple<int, int, int>, const Bytes*> to_me;  // (round, from, to)
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::send && !e.ideal && e.peer == party) {
      to_me[{e.round, e.party, e.peer}] = &e.payload;
    }
  }
  for (const auto& e : trace.events) {
    if (e.ideal || e.round >= trace.rounds || e.party != party) continue;
    auto& rv = v.rounds[e.round];
    if (e.kind == EventKind::send) rv.sent.emplace_back(e.peer, e.payload);
    if (e.kind == EventKind::processed) {
      auto it = to_me.find({e.round, e.peer, party});
      rv.processed.emplace_back(e.peer, it == to_me.end() ? Bytes{} : *it->second);
    }
    if (e.kind == EventKind::ideal_output) rv.ideal.emplace_back(e.note, e.payload);
  }
  return v;
}

namespace {

void put32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_blob(Bytes& out, const Bytes& b) {
  put32(out, static_cast<std::uint32_t>(b.size()));
  out.insert(out.end(), b.begin(), b.end());
}

}  // namespace

Bytes PartyView::serialize() const {
  Bytes out;
  put32(out, static_cast<std::uint32_t>(party));
  put_blob(out, input);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(coins >> (8 * i)));
  put_blob(out, setup);
  put32(out, static_cast<std::uint32_t>(rounds.size()));
  for (const auto& r : rounds) {
    put32(out, static_cast<std::uint32_t>(r.round));
    put32(out, static_cast<std::uint32_t>(r.sent.size()));
    for (const auto& [to, p] : r.sent) {
      put32(out, static_cast<std::uint32_t>(to));
      put_blob(out, p);
    }
    put32(out, static_cast<std::uint32_t>(r.processed.size()));
    for (const auto& [from, p] : r.processed) {
      put32(out, static_cast<std::uint32_t>(from));
      put_blob(out, p);
    }
    put32(out, static_cast<std::uint32_t>(r.ideal.size()));
    for (const auto& [fid, p] : r.ideal) {
      put_blob(out, Bytes(fid.begin(), fid.end()));
      put_blob(out, p);
    }
  }
  return out;
}

}  // namespace commlab::netsim
