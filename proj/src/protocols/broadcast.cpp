#include <algorithm>
#include <map>
#include <set>

#include "commlab/protocols.hpp"
#include "protocols_internal.hpp"

namespace commlab::protocols {

using netsim::Incoming;
using netsim::Outgoing;
using netsim::PartyMachine;

Bytes encode_claims(const std::vector<Claim>& claims) {
  Bytes out;
  crypto::put_u32(out, static_cast<std::uint32_t>(claims.size()));
  for (const auto& c : claims) {
    crypto::put_u32(out, static_cast<std::uint32_t>(c.origin));
    crypto::put_blob(out, c.value);
  }
  return out;
}

std::optional<std::vector<Claim>> decode_claims(const Bytes& b, int n, int kappa) {
  try {
    crypto::Reader r(b);
    std::uint32_t count = r.u32();
    if (count > static_cast<std::uint32_t>(n)) return std::nullopt;
    std::vector<Claim> claims(count);
    for (auto& c : claims) {
      c.origin = static_cast<int>(r.u32());
      c.value = r.blob();
      if (c.origin < 0 || c.origin >= n || static_cast<int>(c.value.size()) != kappa) {
        return std::nullopt;
      }
    }
    if (!r.done()) return std::nullopt;
    return claims;
  } catch (const crypto::FormatError&) {
    return std::nullopt;
  }
}

std::vector<Bytes> split_claims(const Bytes& out, int n, int kappa) {
  std::vector<Bytes> v(n, Bytes(kappa, 0));
  if (static_cast<int>(out.size()) != n * kappa) return v;
  for (int i = 0; i < n; ++i) {
    v[i].assign(out.begin() + i * kappa, out.begin() + (i + 1) * kappa);
  }
  return v;
}

BroadcastCheck check_broadcast(const netsim::Trace& trace, int kappa) {
  BroadcastCheck c;
  const auto honest = netsim::honest_parties(trace);
  std::optional<Bytes> first;
  std::set<int> bad;
  for (int p = 0; p < trace.n; ++p) {
    if (!honest[p]) continue;
    const auto& out = trace.outputs[p];
    if (!out) {
      c.agreement = false;
      c.validity = false;
      continue;
    }
    if (!first) first = *out;
    else if (*first != *out) c.agreement = false;
    auto claims = split_claims(*out, trace.n, kappa);
    for (int i = 0; i < trace.n; ++i) {
      if (honest[i] && claims[i] != normalise_input(trace.inputs[i], kappa)) bad.insert(i);
    }
  }
  c.invalid_coordinates.assign(bad.begin(), bad.end());
  if (!bad.empty()) c.validity = false;
  return c;
}

namespace {

Bytes majority_value(const std::map<int, Bytes>& votes, int kappa) {
  std::map<Bytes, int> count;
  for (const auto& [from, v] : votes) ++count[v];
  Bytes best(kappa, 0);
  int best_count = 0;
  for (const auto& [v, c] : count) {  // byte order, so ties keep the smallest
    if (c > best_count) {
      best = v;
      best_count = c;
    }
  }
  return best;
}

std::vector<int> everyone_but(int me, int lo, int hi) {
  std::vector<int> v;
  for (int j = lo; j < hi; ++j) {
    if (j != me) v.push_back(j);
  }
  return v;
}

// Round 0: own claim to all. Rounds 1..R-1: current belief on every known
// origin to all. Belief = own input, or the majority of the latest report
// from each sender.
class Flooding : public netsim::Protocol {
 public:
  Flooding(int n, int kappa, int rounds) : n_(n), kappa_(kappa), rounds_(rounds) {}
  std::string id() const override { return "flooding"; }
  int n() const override { return n_; }

  struct Machine : PartyMachine {
    int me, n, kappa, rounds;
    Bytes x;
    int done = 0;
    std::vector<std::map<int, Bytes>> reports;

    Bytes belief(int o) const {
      if (o == me) return x;
      return majority_value(reports[o], kappa);
    }
    std::vector<Outgoing> send(int round) override {
      std::vector<Claim> claims;
      if (round == 0) {
        claims.push_back({me, x});
      } else {
        for (int o = 0; o < n; ++o) {
          if (o == me || !reports[o].empty()) claims.push_back({o, belief(o)});
        }
      }
      Bytes payload = encode_claims(claims);
      std::vector<Outgoing> out;
      for (int j : everyone_but(me, 0, n)) out.push_back({j, payload});
      return out;
    }
    bool accept(int, const Incoming& m) override {
      return decode_claims(m.payload, n, kappa).has_value();
    }
    void receive(int, const std::vector<Incoming>& in) override {
      for (const auto& m : in) {
        const auto claims = decode_claims(m.payload, n, kappa);
        for (const auto& c : *claims) {
          if (c.origin != me) reports[c.origin][m.from] = c.value;
        }
      }
      ++done;
    }
    bool finished() const override { return done >= rounds; }
    std::optional<Bytes> output() const override {
      Bytes y;
      for (int o = 0; o < n; ++o) {
        Bytes b = belief(o);
        y.insert(y.end(), b.begin(), b.end());
      }
      return y;
    }
  };

  std::unique_ptr<PartyMachine> make_party(int party, const Bytes& input, CoinStream) override {
    auto m = std::make_unique<Machine>();
    m->me = party;
    m->n = n_;
    m->kappa = kappa_;
    m->rounds = rounds_;
    m->x = normalise_input(input, kappa_);
    m->reports.resize(n_);
    return m;
  }

 private:
  int n_, kappa_, rounds_;
};

// Two halves that talk internally; k bridge pairs (i, h + i) relay each
// half's claims to the other.
class Strawman : public netsim::Protocol {
 public:
  Strawman(int n, int kappa, int k) : n_(n), kappa_(kappa), k_(k) {
    if (n < 2 || n % 2) throw std::invalid_argument("strawman needs even n >= 2");
    if (k < 1 || k > n / 2) throw std::invalid_argument("strawman bridge count out of range");
  }
  std::string id() const override { return "strawman"; }
  int n() const override { return n_; }

  struct Machine : PartyMachine {
    int me, n, kappa, k, h;
    Bytes x;
    int done = 0;
    std::map<int, Bytes> direct;                   // same-half claims
    std::vector<std::map<int, Bytes>> relayed;     // other-half origin -> relayer -> value

    int lo() const { return me < h ? 0 : h; }
    bool bridge() const { return (me % h) < k; }
    int partner() const { return me < h ? me + h : me - h; }
    bool same_half(int j) const { return (j < h) == (me < h); }

    std::vector<Outgoing> send(int round) override {
      std::vector<Outgoing> out;
      if (round == 0) {
        Bytes p = encode_claims({{me, x}});
        for (int j : everyone_but(me, lo(), lo() + h)) out.push_back({j, p});
      } else if (round == 1 && bridge()) {
        std::vector<Claim> claims{{me, x}};
        for (const auto& [o, v] : direct) claims.push_back({o, v});
        std::sort(claims.begin(), claims.end(),
                  [](const Claim& a, const Claim& b) { return a.origin < b.origin; });
        out.push_back({partner(), encode_claims(claims)});
      } else if (round == 2 && bridge()) {
        std::vector<Claim> claims;
        for (int o = 0; o < n; ++o) {
          auto it = relayed[o].find(partner());
          if (it != relayed[o].end()) claims.push_back({o, it->second});
        }
        Bytes p = encode_claims(claims);
        for (int j : everyone_but(me, lo(), lo() + h)) out.push_back({j, p});
      }
      return out;
    }
    bool accept(int round, const Incoming& m) override {
      auto claims = decode_claims(m.payload, n, kappa);
      if (!claims) return false;
      if (round == 0) {
        return same_half(m.from) && claims->size() == 1 && (*claims)[0].origin == m.from;
      }
      if (round == 1) {
        if (!bridge() || m.from != partner()) return false;
        for (const auto& c : *claims) {
          if (same_half(c.origin)) return false;
        }
        return true;
      }
      if (round == 2) {
        if (!same_half(m.from) || (m.from % h) >= k) return false;
        for (const auto& c : *claims) {
          if (same_half(c.origin)) return false;
        }
        return true;
      }
      return false;
    }
    void receive(int round, const std::vector<Incoming>& in) override {
      for (const auto& m : in) {
        const auto claims = decode_claims(m.payload, n, kappa);
        for (const auto& c : *claims) {
          if (round == 0) direct[c.origin] = c.value;
          else relayed[c.origin][m.from] = c.value;
        }
      }
      ++done;
    }
    bool finished() const override { return done >= 3; }
    std::optional<Bytes> output() const override {
      Bytes y;
      for (int o = 0; o < n; ++o) {
        Bytes b(kappa, 0);
        if (o == me) {
          b = x;
        } else if (same_half(o)) {
          auto it = direct.find(o);
          if (it != direct.end()) b = it->second;
        } else {
          b = majority_value(relayed[o], kappa);
        }
        y.insert(y.end(), b.begin(), b.end());
      }
      return y;
    }
  };

  std::unique_ptr<PartyMachine> make_party(int party, const Bytes& input, CoinStream) override {
    auto m = std::make_unique<Machine>();
    m->me = party;
    m->n = n_;
    m->kappa = kappa_;
    m->k = k_;
    m->h = n_ / 2;
    m->x = normalise_input(input, kappa_);
    m->relayed.resize(n_);
    return m;
  }

 private:
  int n_, kappa_, k_;
};

}  // namespace

std::shared_ptr<netsim::Protocol> make_flooding(const ProtocolParams& p) {
  if (p.n < 1) throw std::invalid_argument("flooding needs n >= 1");
  return std::make_shared<Flooding>(p.n, p.kappa, 3);
}

std::shared_ptr<netsim::Protocol> make_strawman(const ProtocolParams& p) {
  return std::make_shared<Strawman>(p.n, p.kappa, p.bridges);
}

}  // namespace commlab::protocols
