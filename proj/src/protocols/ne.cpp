// Committee-bridged MPC on two halves P_1 = [0, m), P_2 = [m, 2m).
//
// round 0: P_1 calls elect-share; C_1 members send the bridge messages
// round 1: P_2 calls recon-compute and outputs y; C_2 members return y
// round 2: P_1 calls out-dist and outputs y
#include <algorithm>
#include <map>
#include <set>

#include "protocols_internal.hpp"

namespace commlab::protocols {

using crypto::Elem;
using crypto::ItSignature;
using crypto::ItSigningKey;
using crypto::ItVerificationKey;
using crypto::MultiSignature;
using crypto::SetupString;
using netsim::Incoming;
using netsim::Outgoing;
using netsim::PartyMachine;
using namespace ne;

namespace {

std::optional<SetupString> parse_setup(const Bytes& b) {
  try {
    return crypto::deserialize_setup(b);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

int rank_of(const std::vector<int>& s, int x) {
  auto it = std::lower_bound(s.begin(), s.end(), x);
  if (it == s.end() || *it != x) return -1;
  return static_cast<int>(it - s.begin());
}

Bytes multisig_bytes(const MultiSignature& s) {
  Bytes b;
  write_multisig(b, s);
  return b;
}

// Majority of candidate values; ties go to the smallest in byte order.
Bytes majority_candidate(const std::vector<Bytes>& cands) {
  std::map<Bytes, int> count;
  for (const auto& c : cands) ++count[c];
  Bytes best;
  int best_count = 0;
  for (const auto& [v, c] : count) {
    if (c > best_count) {
      best = v;
      best_count = c;
    }
  }
  return best;
}

struct NeState {
  ProtocolParams params;
  NeParams q;
  bool adaptive = false;
  crypto::PrimeField field;
};

class NeProtocol : public netsim::Protocol {
 public:
  NeProtocol(const ProtocolParams& p, bool adaptive) {
    st_.params = p;
    st_.q = ne_params(p, adaptive);
    st_.adaptive = adaptive;
    st_.field = crypto::PrimeField(p.prime);
    if (!adaptive && st_.field.p() <= (std::uint64_t{1} << st_.q.m)) {
      throw std::invalid_argument("field too small to sign subset encodings");
    }
    if (st_.field.p() <= static_cast<std::uint64_t>(p.n)) {
      throw std::invalid_argument("field too small for party indices");
    }
    reduce(p.reducer, {}, p.kappa);  // validates the reducer id
  }

  std::string id() const override { return st_.adaptive ? "pi_a_ne" : "pi_ne"; }
  int n() const override { return st_.q.n; }

  void setup(CoinStream& coins) override {
    crypto::StreamRandomness rnd(coins);
    setup_ = crypto::setup_it_pki(st_.field, st_.q.n, st_.q.ell_s, st_.q.ell_v, rnd);
    blobs_.clear();
    for (const auto& s : setup_) blobs_.push_back(crypto::serialize_setup(s));
    record_ = CommitteeRecord{};
    log_.clear();
  }

  Bytes setup_string(int party) const override { return blobs_.at(party); }

  std::unique_ptr<PartyMachine> make_party(int party, const Bytes& input, CoinStream coins) override;

  std::vector<netsim::IdealCallSpec> ideal_calls(int round) const override {
    const int m = st_.q.m;
    std::vector<int> left(m), right(m);
    for (int i = 0; i < m; ++i) {
      left[i] = i;
      right[i] = m + i;
    }
    if (round == 0) return {{kElectShare, left}};
    if (round == 1) return {{kReconCompute, right}};
    if (round == 2) return {{kOutDist, left}};
    return {};
  }

  std::map<int, Bytes> run_functionality(const std::string& fid, int round,
                                         const std::map<int, std::optional<Bytes>>& inputs,
                                         CoinStream& coins) override {
    (void)round;
    if (fid == kElectShare) return elect_share(inputs, coins);
    if (fid == kReconCompute) return recon_compute(inputs);
    if (fid == kOutDist) return out_dist(inputs);
    return netsim::Protocol::run_functionality(fid, round, inputs, coins);
  }

  const CommitteeRecord& record() const { return record_; }
  const std::vector<std::string>& log() const { return log_; }
  const NeState& state() const { return st_; }
  const SetupString& setup_of(int p) const { return setup_.at(p); }

 private:
  ItSigningKey default_key() const {
    return ItSigningKey(st_.field, st_.q.ell_s,
                        std::vector<std::vector<Elem>>(st_.q.n, std::vector<Elem>(st_.q.ell_s + 1, 0)));
  }

  ItSignature sign_or_blank(ItSigningKey& k, Elem m) {
    try {
      return k.sign(m);
    } catch (const crypto::KeyExhausted&) {
      log_.push_back("exhausted signing key replaced by blank signature");
      return ItSignature{std::vector<Elem>(st_.q.n, 0)};
    }
  }

  std::vector<int> sample_subset(CoinStream& coins) const {
    std::vector<int> idx(st_.q.m);
    for (int i = 0; i < st_.q.m; ++i) idx[i] = i;
    for (int k = 0; k < st_.q.n_prime; ++k) {
      auto r = k + static_cast<int>(coins.below(static_cast<std::uint64_t>(st_.q.m - k)));
      std::swap(idx[k], idx[r]);
    }
    idx.resize(st_.q.n_prime);
    std::sort(idx.begin(), idx.end());
    return idx;
  }

  std::map<int, Bytes> elect_share(const std::map<int, std::optional<Bytes>>& inputs,
                                   CoinStream& coins) {
    const auto& q = st_.q;
    const int kappa = st_.params.kappa;
    std::vector<Bytes> x(q.m, Bytes(kappa, 0));
    std::vector<ItSigningKey> keys(q.m, default_key());
    for (int i = 0; i < q.m; ++i) {
      auto it = inputs.find(i);
      std::optional<ElectShareInput> in;
      if (it != inputs.end() && it->second) {
        try {
          in = decode_elect_share_input(*it->second);
        } catch (const std::exception&) {
        }
      }
      if (!in) {
        log_.push_back("elect-share: default input for party " + std::to_string(i));
        continue;
      }
      x[i] = normalise_input(in->x, kappa);
      auto s = parse_setup(in->setup);
      if (s && s->sk.verifiers() == q.n && s->sk.field() == st_.field) {
        keys[i] = s->sk;
      } else {
        log_.push_back("elect-share: default key for party " + std::to_string(i));
      }
    }
    auto c1 = sample_subset(coins);
    auto c2 = sample_subset(coins);
    record_.c1 = c1;
    record_.c2 = c2;

    std::vector<ElectShareOutput> member_out(q.n_prime);
    if (!st_.adaptive) {
      MultiSignature s1, s2;
      const Elem e1 = subset_mask(c1), e2 = subset_mask(c2);
      for (auto& k : keys) s1.push_back(sign_or_blank(k, e1));
      for (auto& k : keys) s2.push_back(sign_or_blank(k, e2));
      for (int j = 0; j < q.n_prime; ++j) {
        member_out[j].sigma1 = s1;
        member_out[j].sigma2 = s2;
      }
    } else {
      for (int j = 0; j < q.n_prime; ++j) {
        for (auto& k : keys) member_out[j].sigma1.push_back(sign_or_blank(k, c1[j]));
        for (auto& k : keys) member_out[j].sigma2.push_back(sign_or_blank(k, q.m + c2[j]));
      }
    }

    crypto::StreamRandomness rnd(coins);
    for (int j = 0; j < q.n_prime; ++j) member_out[j].shares.assign(q.m, {});
    for (int i = 0; i < q.m; ++i) {
      for (int b = 0; b < kappa; ++b) {
        auto shares = crypto::ecss_share(st_.field, x[i][b], q.t_prime, q.n_prime, rnd);
        for (int j = 0; j < q.n_prime; ++j) member_out[j].shares[i].push_back(shares[j]);
      }
    }

    std::map<int, Bytes> out;
    for (int i = 0; i < q.m; ++i) {
      ElectShareOutput o;
      const int j = rank_of(c1, i);
      if (j >= 0) {
        o = member_out[j];
        o.member = true;
        o.position = j;
        if (!st_.adaptive) o.c2 = subset_mask(c2);
        o.partner = q.m + c2[j];
      }
      if (!st_.adaptive) o.c1 = subset_mask(c1);
      out[i] = encode(o);
    }
    return out;
  }

  // Shares at position j, or nullopt when their shape is wrong.
  std::optional<ShareVector> checked_shares(const ShareVector& v, int j) const {
    const auto& q = st_.q;
    if (static_cast<int>(v.size()) != q.m) return std::nullopt;
    for (const auto& bits : v) {
      if (static_cast<int>(bits.size()) != st_.params.kappa) return std::nullopt;
      for (const auto& s : bits) {
        if (s.index != j || static_cast<int>(s.tags.size()) != q.n_prime ||
            static_cast<int>(s.keys.size()) != q.n_prime) {
          return std::nullopt;
        }
      }
    }
    return v;
  }

  std::map<int, Bytes> recon_compute(const std::map<int, std::optional<Bytes>>& inputs) {
    const auto& q = st_.q;
    const int kappa = st_.params.kappa;
    std::vector<std::optional<ReconInput>> in(q.m);
    std::vector<std::optional<SetupString>> setups(q.m);
    std::vector<Bytes> x_right(q.m, Bytes(kappa, 0));
    for (int i = 0; i < q.m; ++i) {
      auto it = inputs.find(q.m + i);
      if (it == inputs.end() || !it->second) continue;
      try {
        in[i] = decode_recon_input(*it->second);
      } catch (const std::exception&) {
        log_.push_back("recon-compute: default input for party " + std::to_string(q.m + i));
        continue;
      }
      x_right[i] = normalise_input(in[i]->x, kappa);
      setups[i] = parse_setup(in[i]->setup);
      if (setups[i] && static_cast<int>(setups[i]->vks.size()) != q.n) setups[i].reset();
    }
    // keys[k] = every right party's key for left signer k
    std::vector<std::vector<ItVerificationKey*>> keys(q.m);
    for (int k = 0; k < q.m; ++k) {
      for (int i = 0; i < q.m; ++i) keys[k].push_back(setups[i] ? &setups[i]->vks[k] : nullptr);
    }
    std::map<std::pair<Elem, Bytes>, bool> verified;
    auto check = [&](Elem msg, const MultiSignature& s) {
      auto key = std::make_pair(msg, multisig_bytes(s));
      auto it = verified.find(key);
      if (it != verified.end()) return it->second;
      bool ok = false;
      try {
        ok = crypto::multi_verify_nested(msg, s, keys, q.sig_t);
      } catch (const crypto::KeyExhausted&) {
        log_.push_back("recon-compute: verification key exhausted");
      }
      verified[key] = ok;
      return ok;
    };

    // position j -> share vector
    std::vector<std::optional<ShareVector>> at(q.n_prime);
    if (!st_.adaptive) {
      std::set<std::uint64_t> named;
      for (int i = 0; i < q.m; ++i) {
        if (in[i] && in[i]->has_z && check(in[i]->c, in[i]->sigma)) named.insert(in[i]->c);
      }
      if (named.size() > 1) {
        log_.push_back("recon-compute: ambiguous committee, default output");
        std::map<int, Bytes> out;
        for (int i = 0; i < q.m; ++i) out[q.m + i] = Bytes{};
        return out;
      }
      if (named.size() == 1) {
        const auto c2 = mask_subset(*named.begin());
        for (int i = 0; i < q.m; ++i) {
          if (!in[i] || !in[i]->has_z || in[i]->c != *named.begin()) continue;
          const int j = rank_of(c2, i);
          if (j < 0 || j >= q.n_prime) continue;
          at[j] = checked_shares(in[i]->shares, j);
        }
      }
    } else {
      for (int i = 0; i < q.m; ++i) {
        if (!in[i] || !in[i]->has_z || in[i]->shares.empty() || in[i]->shares[0].empty()) continue;
        if (!check(static_cast<Elem>(q.m + i), in[i]->sigma)) continue;
        const int j = in[i]->shares[0][0].index;
        if (j < 0 || j >= q.n_prime || at[j]) continue;
        at[j] = checked_shares(in[i]->shares, j);
      }
    }

    std::vector<Bytes> x(q.m, Bytes(kappa, 0));
    for (int i = 0; i < q.m; ++i) {
      for (int b = 0; b < kappa; ++b) {
        std::vector<std::optional<crypto::EcssShare>> col(q.n_prime);
        for (int j = 0; j < q.n_prime; ++j) {
          if (at[j]) col[j] = (*at[j])[i][b];
        }
        Elem v = 0;
        try {
          v = crypto::ecss_recon(st_.field, col, q.t_prime);
        } catch (const crypto::ReconstructionFailure&) {
          log_.push_back("recon-compute: reconstruction failed for input " + std::to_string(i));
          v = 2;
        }
        x[i][b] = static_cast<std::uint8_t>(v > 1 ? 0xff : v);
      }
      x[i] = normalise_input(x[i], kappa);
    }
    x.insert(x.end(), x_right.begin(), x_right.end());
    Bytes y = reduce(st_.params.reducer, x, kappa);
    std::map<int, Bytes> out;
    for (int i = 0; i < q.m; ++i) out[q.m + i] = y;
    return out;
  }

  std::map<int, Bytes> out_dist(const std::map<int, std::optional<Bytes>>& inputs) {
    const auto& q = st_.q;
    std::vector<std::optional<OutDistInput>> in(q.m);
    for (int i = 0; i < q.m; ++i) {
      auto it = inputs.find(i);
      if (it == inputs.end() || !it->second) continue;
      try {
        in[i] = decode_out_dist_input(*it->second);
      } catch (const std::exception&) {
        log_.push_back("out-dist: default input for party " + std::to_string(i));
      }
    }
    std::vector<Bytes> cands;
    if (!st_.adaptive) {
      for (int i : record_.c1) {
        if (in[i] && in[i]->candidate) cands.push_back(*in[i]->candidate);
      }
    } else {
      std::vector<std::optional<SetupString>> setups(q.m);
      for (int i = 0; i < q.m; ++i) {
        if (in[i]) setups[i] = parse_setup(in[i]->setup);
        if (setups[i] && static_cast<int>(setups[i]->vks.size()) != q.n) setups[i].reset();
      }
      std::vector<std::vector<ItVerificationKey*>> keys(q.m);
      for (int k = 0; k < q.m; ++k) {
        for (int i = 0; i < q.m; ++i) keys[k].push_back(setups[i] ? &setups[i]->vks[k] : nullptr);
      }
      for (int i = 0; i < q.m; ++i) {
        if (!in[i] || !in[i]->candidate) continue;
        bool ok = false;
        try {
          ok = crypto::multi_verify_nested(static_cast<Elem>(i), in[i]->sigma_own, keys, q.sig_t);
        } catch (const crypto::KeyExhausted&) {
          log_.push_back("out-dist: verification key exhausted");
        }
        if (ok) cands.push_back(*in[i]->candidate);
      }
    }
    Bytes y;
    if (cands.empty()) log_.push_back("out-dist: no candidates, default output");
    else y = majority_candidate(cands);
    std::map<int, Bytes> out;
    for (int i = 0; i < q.m; ++i) out[i] = y;
    return out;
  }

  NeState st_;
  std::vector<SetupString> setup_;
  std::vector<Bytes> blobs_;
  CommitteeRecord record_;
  std::vector<std::string> log_;
};

std::vector<ItVerificationKey*> left_keys(SetupString& s, int m) {
  std::vector<ItVerificationKey*> k;
  for (int i = 0; i < m; ++i) k.push_back(&s.vks[i]);
  return k;
}

class LeftParty : public PartyMachine {
 public:
  LeftParty(const NeState& st, Bytes x, SetupString setup)
      : st_(st), x_(std::move(x)), setup_(std::move(setup)) {}

  std::optional<Bytes> ideal_input(int round, const std::string& fid) override {
    if (round == 0 && fid == kElectShare) {
      return encode(ElectShareInput{x_, crypto::serialize_setup(setup_)});
    }
    if (round == 2 && fid == kOutDist) {
      OutDistInput in;
      if (elected_ && elected_->member) {
        in.candidate = candidate_;
        if (st_.adaptive) in.sigma_own = elected_->sigma1;
      }
      if (st_.adaptive) in.setup = crypto::serialize_setup(setup_);
      return encode(in);
    }
    return std::nullopt;
  }

  void ideal_output(int round, const std::string& fid, const Bytes& out) override {
    if (round == 0 && fid == kElectShare) {
      try {
        elected_ = decode_elect_share_output(out);
      } catch (const std::exception&) {
        elected_.reset();
      }
    } else if (round == 2 && fid == kOutDist) {
      output_ = out;
    }
  }

  std::vector<Outgoing> send(int round) override {
    std::vector<Outgoing> out;
    if (round != 0 || !elected_ || !elected_->member) return out;
    const auto& e = *elected_;
    const int m = st_.q.m;
    if (st_.adaptive) {
      out.push_back({e.partner, encode(IndexBridgeMessage{e.sigma1, e.sigma2, e.shares})});
      return out;
    }
    const auto c2 = mask_subset(e.c2);
    for (int k = 0; k < static_cast<int>(c2.size()); ++k) {
      BridgeMessage msg{e.c1, e.sigma1, e.c2, e.sigma2, std::nullopt};
      if (k == e.position) msg.shares = e.shares;
      out.push_back({m + c2[k], encode(msg)});
    }
    return out;
  }

  // Only round 1 carries messages to P_1: y from the bridge partner.
  bool accept(int round, const Incoming& msg) override {
    if (round != 1 || !elected_ || !elected_->member) return false;
    if (msg.from != expected_partner()) return false;
    return msg.payload.size() <= static_cast<std::size_t>(st_.q.n * st_.params.kappa);
  }

  void receive(int round, const std::vector<Incoming>& in) override {
    if (round == 1 && !in.empty()) candidate_ = in.front().payload;
    ++done_;
  }

  bool finished() const override { return done_ >= 3; }
  std::optional<Bytes> output() const override { return output_; }

 private:
  int expected_partner() const {
    const auto& e = *elected_;
    if (st_.adaptive) return e.partner;
    auto c2 = mask_subset(e.c2);
    if (e.position < 0 || e.position >= static_cast<int>(c2.size())) return -1;
    return st_.q.m + c2[e.position];
  }

  const NeState& st_;
  Bytes x_;
  SetupString setup_;
  std::optional<ElectShareOutput> elected_;
  std::optional<Bytes> candidate_;
  std::optional<Bytes> output_;
  int done_ = 0;
};

class RightParty : public PartyMachine {
 public:
  RightParty(const NeState& st, int me, Bytes x, SetupString setup)
      : st_(st), me_(me), x_(std::move(x)), setup_(std::move(setup)) {}

  std::vector<Outgoing> send(int round) override {
    if (round == 1 && output_ && partner_ >= 0) return {{partner_, *output_}};
    return {};
  }

  bool accept(int round, const Incoming& msg) override {
    if (round != 0 || msg.from < 0 || msg.from >= st_.q.m) return false;
    return st_.adaptive ? accept_index(msg) : accept_bridge(msg);
  }

  void receive(int, const std::vector<Incoming>&) override { ++done_; }

  std::optional<Bytes> ideal_input(int round, const std::string& fid) override {
    if (round != 1 || fid != kReconCompute) return std::nullopt;
    ReconInput in;
    in.x = x_;
    if (st_.adaptive) {
      if (shares_) {
        in.has_z = true;
        in.sigma = sigma_mine_;
        in.shares = *shares_;
      }
    } else if (proof_) {
      in.has_z = true;
      in.c = proof_->c2;
      in.sigma = proof_->sigma2;
      if (shares_) in.shares = *shares_;
    }
    in.setup = crypto::serialize_setup(setup_);
    return encode(in);
  }

  void ideal_output(int round, const std::string& fid, const Bytes& out) override {
    if (round == 1 && fid == kReconCompute) output_ = out;
  }

  bool finished() const override { return done_ >= 2; }
  std::optional<Bytes> output() const override { return output_; }

 private:
  bool verify(Elem msg, const MultiSignature& s) {
    try {
      return crypto::multi_verify(msg, s, left_keys(setup_, st_.q.m), st_.q.sig_t);
    } catch (const crypto::KeyExhausted&) {
      return false;
    }
  }

  bool accept_bridge(const Incoming& msg) {
    const auto& q = st_.q;
    BridgeMessage b;
    try {
      b = decode_bridge(msg.payload);
    } catch (const std::exception&) {
      return false;
    }
    if (b.c1 >> q.m || b.c2 >> q.m) return false;
    const auto c1 = mask_subset(b.c1), c2 = mask_subset(b.c2);
    if (static_cast<int>(c1.size()) != q.n_prime || static_cast<int>(c2.size()) != q.n_prime) {
      return false;
    }
    const int sender_pos = rank_of(c1, msg.from);
    const int my_pos = rank_of(c2, me_ - q.m);
    if (sender_pos < 0 || my_pos < 0) return false;
    const bool partner = sender_pos == my_pos;
    if (partner != b.shares.has_value()) return false;
    if (partner && !shape_ok(*b.shares, my_pos)) return false;
    if (proof_) {
      // A second, different signed pair would need a forgery; only the
      // first verified pair is ever accepted.
      if (proof_->c1 != b.c1 || proof_->c2 != b.c2 || proof_->sigma1 != b.sigma1 ||
          proof_->sigma2 != b.sigma2) {
        return false;
      }
    } else {
      if (!verify(b.c1, b.sigma1) || !verify(b.c2, b.sigma2)) return false;
      proof_ = BridgeMessage{b.c1, b.sigma1, b.c2, b.sigma2, std::nullopt};
      partner_ = c1[my_pos];
    }
    if (partner) {
      if (shares_) return false;
      shares_ = b.shares;
    }
    return true;
  }

  bool accept_index(const Incoming& msg) {
    if (shares_) return false;
    IndexBridgeMessage b;
    try {
      b = decode_index_bridge(msg.payload);
    } catch (const std::exception&) {
      return false;
    }
    if (b.shares.empty() || b.shares[0].empty()) return false;
    const int j = b.shares[0][0].index;
    if (j < 0 || j >= st_.q.n_prime || !shape_ok(b.shares, j)) return false;
    if (!verify(static_cast<Elem>(msg.from), b.sigma_own) ||
        !verify(static_cast<Elem>(me_), b.sigma_partner)) {
      return false;
    }
    shares_ = std::move(b.shares);
    sigma_mine_ = std::move(b.sigma_partner);
    partner_ = msg.from;
    return true;
  }

  bool shape_ok(const ShareVector& v, int j) const {
    if (static_cast<int>(v.size()) != st_.q.m) return false;
    for (const auto& bits : v) {
      if (static_cast<int>(bits.size()) != st_.params.kappa) return false;
      for (const auto& s : bits) {
        if (s.index != j || static_cast<int>(s.tags.size()) != st_.q.n_prime ||
            static_cast<int>(s.keys.size()) != st_.q.n_prime) {
          return false;
        }
      }
    }
    return true;
  }

  const NeState& st_;
  int me_;
  Bytes x_;
  SetupString setup_;
  std::optional<BridgeMessage> proof_;
  std::optional<ShareVector> shares_;
  MultiSignature sigma_mine_;
  int partner_ = -1;
  std::optional<Bytes> output_;
  int done_ = 0;
};

std::unique_ptr<PartyMachine> NeProtocol::make_party(int party, const Bytes& input, CoinStream) {
  if (setup_.empty()) throw std::logic_error("make_party before setup");
  Bytes x = normalise_input(input, st_.params.kappa);
  if (party < st_.q.m) return std::make_unique<LeftParty>(st_, x, setup_.at(party));
  return std::make_unique<RightParty>(st_, party, x, setup_.at(party));
}

}  // namespace

std::optional<CommitteeRecord> committees_of(const netsim::Protocol& p) {
  auto* ne = dynamic_cast<const NeProtocol*>(&p);
  if (!ne) return std::nullopt;
  return ne->record();
}

std::shared_ptr<netsim::Protocol> make_ne(const ProtocolParams& p, bool adaptive) {
  return std::make_shared<NeProtocol>(p, adaptive);
}

}  // namespace commlab::protocols
