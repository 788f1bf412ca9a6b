#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "commlab/protocols.hpp"

using namespace commlab;
using namespace commlab::protocols;
using namespace commlab::protocols::ne;
using netsim::ExecutionInstance;
using netsim::Incoming;

namespace {

std::vector<Bytes> random_inputs(int n, int kappa, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Bytes> x(n, Bytes(kappa));
  for (auto& xi : x) {
    for (auto& b : xi) b = rng() & 1;
  }
  return x;
}

ExecutionInstance honest_instance(const std::string& id, const ProtocolParams& p,
                                  std::uint64_t seed) {
  ExecutionInstance inst;
  inst.protocol = make_protocol(id, p);
  inst.kappa = p.kappa;
  inst.inputs = random_inputs(p.n, p.kappa, seed * 7919 + 1);
  inst.seed = seed;
  if (id == "pi_a_ne") inst.channel = netsim::ChannelModel::hidden;
  return inst;
}

ProtocolParams small(int n = 8, int committee = 2) {
  ProtocolParams p;
  p.n = n;
  p.committee = committee;
  p.kappa = 4;
  return p;
}

graphkit::VertexSet range(int lo, int hi) {
  graphkit::VertexSet v(hi - lo);
  std::iota(v.begin(), v.end(), lo);
  return v;
}

std::size_t ideal_sends(const netsim::Trace& tr) {
  return std::count_if(tr.events.begin(), tr.events.end(), [](const netsim::Event& e) {
    return e.kind == netsim::EventKind::send && e.ideal;
  });
}

// Setup strings and functionality coins for driving a protocol by hand.
struct Bench {
  std::shared_ptr<netsim::Protocol> proto;
  std::vector<crypto::SetupString> setup;
  CoinStream coins{99, netsim::kFunctionalityStream};

  Bench(const std::string& id, const ProtocolParams& p) : proto(make_protocol(id, p)) {
    CoinStream sc(5, netsim::kSetupStream);
    proto->setup(sc);
    for (int i = 0; i < p.n; ++i) setup.push_back(crypto::deserialize_setup(proto->setup_string(i)));
  }

  std::map<int, Bytes> elect(const std::vector<Bytes>& x, int m) {
    std::map<int, std::optional<Bytes>> in;
    for (int i = 0; i < m; ++i) {
      in[i] = encode(ElectShareInput{x[i], crypto::serialize_setup(setup[i])});
    }
    return proto->run_functionality(kElectShare, 0, in, coins);
  }
};

}  // namespace

// ---------------------------------------------------------------------------

TEST(Registry, KnownIdsAndErrors) {
  EXPECT_EQ(protocol_ids(), (std::vector<std::string>{"pi_ne", "pi_a_ne", "flooding", "strawman"}));
  EXPECT_THROW(make_protocol("nope", small()), std::invalid_argument);
  auto odd = small();
  odd.n = 7;
  EXPECT_THROW(make_protocol("pi_ne", odd), std::invalid_argument);
  EXPECT_THROW(make_protocol("strawman", odd), std::invalid_argument);
  auto big = small(8, 5);
  EXPECT_THROW(make_protocol("pi_ne", big), std::invalid_argument);
  auto bad_reducer = small();
  bad_reducer.reducer = "sum";
  EXPECT_THROW(make_protocol("pi_ne", bad_reducer), std::invalid_argument);
  auto bad_delta = small();
  bad_delta.delta = 0.5;
  EXPECT_THROW(make_protocol("pi_a_ne", bad_delta), std::invalid_argument);
}

TEST(Params, DerivedFields) {
  ProtocolParams p;
  p.n = 16;
  p.committee = 6;
  auto q = ne_params(p, false);
  EXPECT_EQ(q.m, 8);
  EXPECT_EQ(q.t_prime, 2);
  EXPECT_EQ(q.sig_t, 2);
  EXPECT_EQ(q.ell_s, 2);
  EXPECT_EQ(ne_params(p, true).ell_s, 12);
  EXPECT_EQ(default_committee_size(16), 16);
  EXPECT_EQ(default_committee_size(1024), 100);
  p.committee = 0;
  EXPECT_THROW(ne_params(p, false), std::invalid_argument);  // 16 > m
}

TEST(Reducers, Semantics) {
  std::vector<Bytes> x{{1, 0, 1}, {1, 1, 0}, {0, 1, 0}};
  EXPECT_EQ(reduce("xor", x, 3), (Bytes{0, 0, 1}));
  EXPECT_EQ(reduce("majority", x, 3), (Bytes{1, 1, 0}));
  EXPECT_EQ(reduce("concat", x, 3), (Bytes{1, 0, 1, 1, 1, 0, 0, 1, 0}));
  EXPECT_EQ(reduce("xor", {{1, 2, 0}, {0, 0, 1}}, 3), (Bytes{0, 0, 1}));  // invalid -> zeros
  EXPECT_EQ(reduce("majority", {{1}, {0}}, 1), (Bytes{0}));
}

// ---------------------------------------------------------------------------
// Honest runs.

TEST(Honest, CommitteeProtocolsComputeReducer) {
  for (const std::string id : {"pi_ne", "pi_a_ne"}) {
    for (const std::string red : {"xor", "concat", "majority"}) {
      for (std::uint64_t seed = 0; seed < (red == "xor" ? 100u : 10u); ++seed) {
        auto p = small(seed % 2 ? 8 : 12, 2 + static_cast<int>(seed % 3));
        p.reducer = red;
        auto inst = honest_instance(id, p, seed);
        auto tr = netsim::run_instance(inst);
        const Bytes want = reduce(red, inst.inputs, p.kappa);
        for (int i = 0; i < p.n; ++i) {
          ASSERT_TRUE(tr.outputs[i]) << id << " seed " << seed << " party " << i;
          ASSERT_EQ(*tr.outputs[i], want) << id << " seed " << seed << " party " << i;
        }
        EXPECT_EQ(tr.rounds, 3);
      }
    }
  }
}

TEST(Honest, BroadcastProtocolsAgreeAndAreValid) {
  for (const std::string id : {"flooding", "strawman"}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      auto p = small(seed % 2 ? 8 : 10);
      p.kappa = p.n;
      auto tr = netsim::run_instance(honest_instance(id, p, seed));
      auto c = check_broadcast(tr, p.kappa);
      ASSERT_TRUE(c.agreement) << id << " seed " << seed;
      ASSERT_TRUE(c.validity) << id << " seed " << seed;
    }
  }
}

TEST(Honest, SameSeedSameTrace) {
  auto p = small();
  for (const auto& id : protocol_ids()) {
    auto a = netsim::run_instance(honest_instance(id, p, 3)).to_ndjson();
    auto b = netsim::run_instance(honest_instance(id, p, 3)).to_ndjson();
    EXPECT_EQ(a, b) << id;
  }
}

// ---------------------------------------------------------------------------
// Graph structure.

TEST(Structure, CrossHalfEdgesXorN8) {
  auto p = small(8, 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto ne = netsim::run_instance(honest_instance("pi_ne", p, seed));
    auto g = netsim::build_graphs(ne).full;
    EXPECT_EQ(graphkit::edges_between(g, range(0, 4), range(4, 8)), 4);
    auto ane = netsim::run_instance(honest_instance("pi_a_ne", p, seed));
    auto ga = netsim::build_graphs(ane).full;
    EXPECT_EQ(graphkit::edges_between(ga, range(0, 4), range(4, 8)), 2);
  }
}

TEST(Structure, CrossHalfEdgesGeneral) {
  for (int committee : {2, 3, 4, 5}) {
    auto p = small(12, committee);
    auto m = p.n / 2;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto g = netsim::build_graphs(netsim::run_instance(honest_instance("pi_ne", p, seed))).full;
      EXPECT_EQ(graphkit::edges_between(g, range(0, m), range(m, p.n)), committee * committee);
      auto ga = netsim::build_graphs(netsim::run_instance(honest_instance("pi_a_ne", p, seed))).full;
      EXPECT_EQ(graphkit::edges_between(ga, range(0, m), range(m, p.n)), committee);
    }
  }
}

TEST(Structure, ExpansionBoundedByCommitteeCut) {
  for (int n : {8, 12, 16}) {
    auto p = small(n, 2);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto g = netsim::build_graphs(netsim::run_instance(honest_instance("pi_ne", p, seed))).full;
      auto h = graphkit::edge_expansion(g);
      EXPECT_LE(h, graphkit::ExpansionRatio::make(2 * 2 * 2, n)) << "n=" << n << " h=" << h.str();
    }
  }
}

TEST(Structure, LocalityBound) {
  for (int n : {8, 12, 16}) {
    for (int committee : {2, 3, 4}) {
      auto p = small(n, committee);
      const int m = n / 2;
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto ne = netsim::locality(netsim::run_instance(honest_instance("pi_ne", p, seed)));
        EXPECT_LE(ne.max, 2 * (m - 1) + committee);
        EXPECT_EQ(ne.max, m - 1 + committee);  // a C_1 member: own half plus all of C_2
        auto ane = netsim::locality(netsim::run_instance(honest_instance("pi_a_ne", p, seed)));
        EXPECT_LE(ane.max, 2 * (m - 1) + 1);
        EXPECT_EQ(ane.max, m);  // own half plus one partner
      }
    }
  }
}

TEST(Structure, IdealCallEdgeAccounting) {
  auto p = small(8, 2);
  auto inst = honest_instance("pi_ne", p, 1);
  auto clique = netsim::run_instance(inst);
  EXPECT_EQ(ideal_sends(clique), 3u * 4 * 3);  // three calls, 4 participants each
  for (const auto& e : clique.events) {
    if (e.kind == netsim::EventKind::send && e.ideal) {
      EXPECT_EQ(e.party < 4, e.peer < 4);  // stays inside one half
    }
  }
  inst.ideal_mode = netsim::IdealMode::oracle;
  auto oracle = netsim::run_instance(inst);
  EXPECT_EQ(ideal_sends(oracle), 0u);
  EXPECT_EQ(oracle.outputs, clique.outputs);
  auto g = netsim::build_graphs(oracle).full;
  // Only the bridge and the return edges remain.
  EXPECT_EQ(g.edge_count(), 4u);
}

TEST(Structure, StrawmanHasCutOfWeightK) {
  for (int k : {1, 2, 3}) {
    auto p = small(10);
    p.kappa = 10;
    p.bridges = k;
    auto g = netsim::build_graphs(netsim::run_instance(honest_instance("strawman", p, 4))).full;
    EXPECT_EQ(graphkit::cut_weight(g, range(0, 5)), k);
  }
}

TEST(Structure, FloodingIsComplete) {
  auto p = small(8);
  p.kappa = 8;
  auto g = netsim::build_graphs(netsim::run_instance(honest_instance("flooding", p, 4))).full;
  EXPECT_EQ(g.edge_count(), 28u);
}

// ---------------------------------------------------------------------------
// Functionalities driven directly.

TEST(ElectShare, DeterministicAndShaped) {
  auto p = small(8, 2);
  auto x = random_inputs(8, p.kappa, 1);
  Bench a("pi_ne", p), b("pi_ne", p);
  auto oa = a.elect(x, 4);
  auto ob = b.elect(x, 4);
  EXPECT_EQ(oa, ob);
  int members = 0;
  std::uint64_t c1 = 0;
  for (int i = 0; i < 4; ++i) {
    auto o = decode_elect_share_output(oa.at(i));
    if (i == 0) c1 = o.c1;
    EXPECT_EQ(o.c1, c1);
    if (!o.member) continue;
    ++members;
    EXPECT_EQ(o.shares.size(), 4u);  // one share vector per left input
    for (const auto& bits : o.shares) {
      ASSERT_EQ(bits.size(), static_cast<std::size_t>(p.kappa));
      for (const auto& s : bits) EXPECT_EQ(s.index, o.position);
    }
    EXPECT_EQ(mask_subset(o.c1)[o.position], i);
    EXPECT_EQ(mask_subset(o.c2).size(), 2u);
  }
  EXPECT_EQ(members, 2);
  auto rec = committees_of(*a.proto);
  ASSERT_TRUE(rec);
  EXPECT_EQ(subset_mask(rec->c1), c1);
}

TEST(ElectShare, CommitteesCoverAllSubsets) {
  auto p = small(8, 2);
  auto x = random_inputs(8, p.kappa, 1);
  Bench b("pi_ne", p);
  std::map<std::vector<int>, int> seen;
  for (int r = 0; r < 600; ++r) {
    b.elect(x, 4);
    ++seen[committees_of(*b.proto)->c1];
  }
  ASSERT_EQ(seen.size(), 6u);  // C(4,2)
  for (const auto& [s, c] : seen) EXPECT_GT(c, 60);
}

TEST(ElectShare, AdaptiveRevealsOnePartner) {
  auto p = small(8, 2);
  auto x = random_inputs(8, p.kappa, 2);
  Bench b("pi_a_ne", p);
  auto out = b.elect(x, 4);
  auto rec = *committees_of(*b.proto);
  for (int i = 0; i < 4; ++i) {
    auto o = decode_elect_share_output(out.at(i));
    EXPECT_EQ(o.c1, 0u);
    EXPECT_EQ(o.c2, 0u);
    if (!o.member) continue;
    EXPECT_EQ(o.partner, 4 + rec.c2[o.position]);
  }
}

TEST(ElectShare, MalformedKeyFallsBackToDefault) {
  auto p = small(8, 2);
  auto x = random_inputs(8, p.kappa, 3);
  Bench b("pi_ne", p);
  std::map<int, std::optional<Bytes>> in;
  for (int i = 0; i < 4; ++i) {
    in[i] = encode(ElectShareInput{x[i], i == 2 ? Bytes{1, 2, 3} : crypto::serialize_setup(b.setup[i])});
  }
  in[3] = Bytes{7};  // undecodable input
  auto out = b.proto->run_functionality(kElectShare, 0, in, b.coins);
  EXPECT_EQ(out.size(), 4u);
}

namespace {

// Builds the right-half recon inputs an honest run would produce.
std::map<int, std::optional<Bytes>> recon_inputs(Bench& b, const std::map<int, Bytes>& es,
                                                 const std::vector<Bytes>& x, int m) {
  auto rec = *committees_of(*b.proto);
  std::map<int, std::optional<Bytes>> in;
  for (int i = 0; i < m; ++i) {
    ReconInput r;
    r.x = x[m + i];
    r.setup = crypto::serialize_setup(b.setup[m + i]);
    in[m + i] = encode(r);
  }
  for (int i = 0; i < m; ++i) {
    auto o = decode_elect_share_output(es.at(i));
    if (!o.member) continue;
    const int right = m + rec.c2[o.position];
    ReconInput r = decode_recon_input(*in[right]);
    r.has_z = true;
    r.c = o.c2;
    r.sigma = o.sigma2;
    r.shares = o.shares;
    in[right] = encode(r);
  }
  return in;
}

}  // namespace

TEST(ReconCompute, HonestMatchesReducer) {
  for (bool adaptive : {false, true}) {
    auto p = small(8, 2);
    auto x = random_inputs(8, p.kappa, 11);
    Bench b(adaptive ? "pi_a_ne" : "pi_ne", p);
    auto es = b.elect(x, 4);
    auto out = b.proto->run_functionality(kReconCompute, 1, recon_inputs(b, es, x, 4), b.coins);
    ASSERT_EQ(out.size(), 4u);
    for (const auto& [party, y] : out) EXPECT_EQ(y, reduce("xor", x, p.kappa)) << party;
  }
}

// Every choice of t' share vectors, each tampered in every field, still
// reconstructs the left inputs.
TEST(ReconCompute, ToleratesTPrimeTamperedShareVectors) {
  auto p = small(16, 6);  // t' = 2
  const int m = 8;
  ASSERT_EQ(ne_params(p, false).t_prime, 2);
  for (bool adaptive : {false, true}) {
    auto x = random_inputs(16, p.kappa, 21);
    Bench b(adaptive ? "pi_a_ne" : "pi_ne", p);
    auto es = b.elect(x, m);
    auto rec = *committees_of(*b.proto);
    const auto honest = recon_inputs(b, es, x, m);
    const Bytes want = reduce("xor", x, p.kappa);
    int cases = 0;
    for (int j1 = 0; j1 < 6; ++j1) {
      for (int j2 = j1 + 1; j2 < 6; ++j2) {
        for (int mode = 0; mode < 3; ++mode) {
          auto in = honest;
          for (int j : {j1, j2}) {
            const int right = m + rec.c2[j];
            auto r = decode_recon_input(*in[right]);
            for (auto& bits : r.shares) {
              for (auto& s : bits) {
                if (mode == 0) s.value = (s.value + 1) % crypto::kMersenne61;
                if (mode == 1) s.tags[(j + 1) % 6] ^= 1;
                if (mode == 2) s.value = 0;
              }
            }
            in[right] = encode(r);
          }
          auto out = b.proto->run_functionality(kReconCompute, 1, in, b.coins);
          for (const auto& [party, y] : out) ASSERT_EQ(y, want) << j1 << "," << j2 << " mode " << mode;
          ++cases;
        }
      }
    }
    EXPECT_EQ(cases, 45);
  }
}

TEST(ReconCompute, WithheldSharesAreErasures) {
  auto p = small(16, 6);
  const int m = 8;
  auto x = random_inputs(16, p.kappa, 22);
  Bench b("pi_ne", p);
  auto es = b.elect(x, m);
  auto rec = *committees_of(*b.proto);
  auto in = recon_inputs(b, es, x, m);
  for (int j : {0, 3}) {
    auto r = decode_recon_input(*in[m + rec.c2[j]]);
    r.has_z = false;
    in[m + rec.c2[j]] = encode(r);
  }
  auto out = b.proto->run_functionality(kReconCompute, 1, in, b.coins);
  EXPECT_EQ(out.at(m), reduce("xor", x, p.kappa));
}

TEST(ReconCompute, ForgedCommitteeSignatureIgnored) {
  auto p = small(8, 2);
  auto x = random_inputs(8, p.kappa, 23);
  Bench b("pi_ne", p);
  auto es = b.elect(x, 4);
  auto in = recon_inputs(b, es, x, 4);
  // A right party outside C_2 claims a different committee with a junk signature.
  auto rec = *committees_of(*b.proto);
  int outsider = -1;
  for (int i = 0; i < 4; ++i) {
    if (std::find(rec.c2.begin(), rec.c2.end(), i) == rec.c2.end()) outsider = 4 + i;
  }
  auto r = decode_recon_input(*in[outsider]);
  r.has_z = true;
  r.c = subset_mask({outsider - 4, rec.c2[0] == 0 ? 1 : 0});
  r.sigma.assign(4, crypto::ItSignature{std::vector<crypto::Elem>(8, 5)});
  in[outsider] = encode(r);
  auto out = b.proto->run_functionality(kReconCompute, 1, in, b.coins);
  EXPECT_EQ(out.at(4), reduce("xor", x, p.kappa));
}

TEST(ReconCompute, TwoValidlySignedCommitteesGiveDefault) {
  auto p = small(8, 2);
  auto x = random_inputs(8, p.kappa, 24);
  Bench b("pi_ne", p);
  auto es = b.elect(x, 4);
  auto in = recon_inputs(b, es, x, 4);
  auto rec = *committees_of(*b.proto);
  std::vector<int> other;
  for (int i = 0; i < 4 && other.size() < 2; ++i) {
    if (std::find(rec.c2.begin(), rec.c2.end(), i) == rec.c2.end()) other.push_back(i);
  }
  // Sign a second subset with fresh copies of every left key.
  MultiSignature sigma;
  for (int i = 0; i < 4; ++i) {
    auto sk = b.setup[i].sk;
    sigma.push_back(sk.sign(subset_mask(other)));
  }
  auto r = decode_recon_input(*in[4 + other[0]]);
  r.has_z = true;
  r.c = subset_mask(other);
  r.sigma = sigma;
  in[4 + other[0]] = encode(r);
  auto out = b.proto->run_functionality(kReconCompute, 1, in, b.coins);
  for (const auto& [party, y] : out) EXPECT_TRUE(y.empty());
}

TEST(OutDist, MajorityTiesAndEmpty) {
  auto p = small(12, 3);
  auto x = random_inputs(12, p.kappa, 30);
  Bench b("pi_ne", p);
  b.elect(x, 6);
  auto c1 = committees_of(*b.proto)->c1;
  auto run = [&](std::vector<std::optional<Bytes>> cands) {
    std::map<int, std::optional<Bytes>> in;
    for (int i = 0; i < 6; ++i) in[i] = encode(OutDistInput{});
    for (int j = 0; j < 3; ++j) {
      OutDistInput o;
      o.candidate = cands[j];
      in[c1[j]] = encode(o);
    }
    // A non-member pushing a value is ignored.
    for (int i = 0; i < 6; ++i) {
      if (std::find(c1.begin(), c1.end(), i) == c1.end()) {
        OutDistInput o;
        o.candidate = Bytes{9, 9};
        in[i] = encode(o);
      }
    }
    auto out = b.proto->run_functionality(kOutDist, 2, in, b.coins);
    EXPECT_EQ(out.size(), 6u);
    return out.at(0);
  };
  EXPECT_EQ(run({Bytes{1}, Bytes{1}, Bytes{1}}), Bytes{1});
  EXPECT_EQ(run({Bytes{1}, Bytes{0}, Bytes{1}}), Bytes{1});
  EXPECT_EQ(run({Bytes{2}, Bytes{1}, std::nullopt}), Bytes{1});
  EXPECT_EQ(run({std::nullopt, std::nullopt, std::nullopt}), Bytes{});
}

TEST(OutDist, AdaptiveNeedsSignedOwnIndex) {
  auto p = small(8, 2);
  auto x = random_inputs(8, p.kappa, 31);
  Bench b("pi_a_ne", p);
  auto es = b.elect(x, 4);
  std::map<int, std::optional<Bytes>> in;
  int forger = -1;
  for (int i = 0; i < 4; ++i) {
    auto o = decode_elect_share_output(es.at(i));
    OutDistInput d;
    d.setup = crypto::serialize_setup(b.setup[i]);
    if (o.member) {
      d.candidate = Bytes{1};
      d.sigma_own = o.sigma1;
    } else {
      forger = i;
      d.candidate = Bytes{0};
      d.sigma_own = decode_elect_share_output(es.at(committees_of(*b.proto)->c1[0])).sigma1;
    }
    in[i] = encode(d);
  }
  ASSERT_GE(forger, 0);
  // Two non-members with stolen signatures would tie the vote if accepted.
  auto out = b.proto->run_functionality(kOutDist, 2, in, b.coins);
  EXPECT_EQ(out.at(0), Bytes{1});
}

// ---------------------------------------------------------------------------
// Receiver filters.

TEST(Filter, BridgeMessageChecks) {
  auto p = small(8, 2);
  auto x = random_inputs(8, p.kappa, 40);
  Bench b("pi_ne", p);
  auto es = b.elect(x, 4);
  auto rec = *committees_of(*b.proto);
  const int sender = rec.c1[0];
  auto o = decode_elect_share_output(es.at(sender));
  const int partner = 4 + rec.c2[0];
  const int other = 4 + rec.c2[1];

  auto fresh = [&](int party) {
    return b.proto->make_party(party, x[party], CoinStream(1, party));
  };
  BridgeMessage good{o.c1, o.sigma1, o.c2, o.sigma2, o.shares};
  EXPECT_TRUE(fresh(partner)->accept(0, {sender, encode(good)}));

  auto bad_sig = good;
  bad_sig.sigma1[0].coeffs[0] ^= 1;
  bad_sig.sigma1[1].coeffs[0] ^= 1;
  bad_sig.sigma1[2].coeffs[0] ^= 1;
  EXPECT_FALSE(fresh(partner)->accept(0, {sender, encode(bad_sig)}));

  auto one_bad = good;  // up to sig_t bad components pass
  one_bad.sigma1[0].coeffs[0] ^= 1;
  EXPECT_EQ(ne_params(p, false).sig_t, 1);
  EXPECT_TRUE(fresh(partner)->accept(0, {sender, encode(one_bad)}));

  EXPECT_FALSE(fresh(other)->accept(0, {sender, encode(good)}));  // shares for someone else
  auto no_shares = good;
  no_shares.shares.reset();
  EXPECT_TRUE(fresh(other)->accept(0, {sender, encode(no_shares)}));
  EXPECT_FALSE(fresh(partner)->accept(0, {sender, encode(no_shares)}));

  int outsider = 0;
  while (std::find(rec.c1.begin(), rec.c1.end(), outsider) != rec.c1.end()) ++outsider;
  EXPECT_FALSE(fresh(partner)->accept(0, {outsider, encode(good)}));
  EXPECT_FALSE(fresh(partner)->accept(1, {sender, encode(good)}));
  EXPECT_FALSE(fresh(partner)->accept(0, {sender, Bytes{1, 2, 3}}));

  auto m = fresh(partner);
  EXPECT_TRUE(m->accept(0, {sender, encode(good)}));
  EXPECT_FALSE(m->accept(0, {sender, encode(good)}));  // second share vector
}

TEST(Filter, IndexBridgeChecks) {
  auto p = small(8, 2);
  auto x = random_inputs(8, p.kappa, 41);
  Bench b("pi_a_ne", p);
  auto es = b.elect(x, 4);
  auto rec = *committees_of(*b.proto);
  const int sender = rec.c1[1];
  auto o = decode_elect_share_output(es.at(sender));
  ASSERT_EQ(o.partner, 4 + rec.c2[1]);
  IndexBridgeMessage good{o.sigma1, o.sigma2, o.shares};
  auto fresh = [&](int party) {
    return b.proto->make_party(party, x[party], CoinStream(1, party));
  };
  EXPECT_TRUE(fresh(o.partner)->accept(0, {sender, encode(good)}));
  const int wrong = 4 + rec.c2[0];
  EXPECT_FALSE(fresh(wrong)->accept(0, {sender, encode(good)}));  // signed for another index
  const int other_sender = rec.c1[0];
  EXPECT_FALSE(fresh(o.partner)->accept(0, {other_sender, encode(good)}));
  auto m = fresh(o.partner);
  EXPECT_TRUE(m->accept(0, {sender, encode(good)}));
  EXPECT_FALSE(m->accept(0, {sender, encode(good)}));
}

TEST(Filter, LeftAcceptsOnlyPartnerReturn) {
  auto p = small(8, 2);
  auto x = random_inputs(8, p.kappa, 42);
  Bench b("pi_ne", p);
  auto es = b.elect(x, 4);
  auto rec = *committees_of(*b.proto);
  auto left = b.proto->make_party(rec.c1[1], x[rec.c1[1]], CoinStream(1, 0));
  left->ideal_output(0, kElectShare, es.at(rec.c1[1]));
  EXPECT_TRUE(left->accept(1, {4 + rec.c2[1], Bytes(4, 1)}));
  EXPECT_FALSE(left->accept(1, {4 + rec.c2[0], Bytes(4, 1)}));
  EXPECT_FALSE(left->accept(0, {4 + rec.c2[1], Bytes(4, 1)}));
}

// ---------------------------------------------------------------------------
// Wire formats.

TEST(Codec, RoundTripsAndRejectsTruncation) {
  auto p = small(8, 2);
  auto x = random_inputs(8, p.kappa, 50);
  Bench b("pi_ne", p);
  auto es = b.elect(x, 4);
  auto o = decode_elect_share_output(es.at(committees_of(*b.proto)->c1[0]));
  EXPECT_EQ(encode(o), es.at(committees_of(*b.proto)->c1[0]));
  BridgeMessage msg{o.c1, o.sigma1, o.c2, o.sigma2, o.shares};
  Bytes enc = encode(msg);
  auto back = decode_bridge(enc);
  EXPECT_EQ(encode(back), enc);
  for (std::size_t cut : {std::size_t{0}, enc.size() / 2, enc.size() - 1}) {
    EXPECT_THROW(decode_bridge(Bytes(enc.begin(), enc.begin() + cut)), crypto::FormatError);
  }
  Bytes extra = enc;
  extra.push_back(0);
  EXPECT_THROW(decode_bridge(extra), crypto::FormatError);

  OutDistInput d{Bytes{1, 0}, o.sigma1, Bytes{5}};
  EXPECT_EQ(encode(decode_out_dist_input(encode(d))), encode(d));
  ReconInput r{Bytes{1}, true, 6, o.sigma2, o.shares, Bytes{2}};
  EXPECT_EQ(encode(decode_recon_input(encode(r))), encode(r));
}

TEST(Codec, ClaimsAndMasks) {
  std::vector<Claim> c{{0, {1, 0}}, {3, {0, 1}}};
  auto back = decode_claims(encode_claims(c), 4, 2);
  ASSERT_TRUE(back);
  EXPECT_EQ((*back)[1].origin, 3);
  EXPECT_FALSE(decode_claims(encode_claims(c), 3, 2));
  EXPECT_FALSE(decode_claims(encode_claims(c), 4, 3));
  EXPECT_EQ(subset_mask({0, 2, 5}), 0b100101u);
  EXPECT_EQ(mask_subset(0b100101u), (std::vector<int>{0, 2, 5}));
  EXPECT_EQ(split_claims(Bytes{1, 0, 0, 1}, 2, 2), (std::vector<Bytes>{{1, 0}, {0, 1}}));
}
