#include <gtest/gtest.h>

#include "commlab/crypto.hpp"
#include "crypto_sweeps.hpp"

using namespace commlab;
using namespace commlab::crypto;

TEST(PrimeField, Axioms) {
  PrimeField f(17);
  for (Elem a = 0; a < 17; ++a) {
    EXPECT_EQ(f.add(a, f.neg(a)), 0u);
    if (a) {
      EXPECT_EQ(f.mul(a, f.inv(a)), 1u);
    }
    for (Elem b = 0; b < 17; ++b) {
      EXPECT_EQ(f.add(a, b), (a + b) % 17);
      EXPECT_EQ(f.mul(a, b), (a * b) % 17);
      EXPECT_EQ(f.sub(f.add(a, b), b), a);
    }
  }
  EXPECT_THROW(f.inv(0), std::domain_error);
  EXPECT_THROW(PrimeField(15), std::invalid_argument);
  EXPECT_TRUE(is_prime(kMersenne61));
  PrimeField big;
  EXPECT_EQ(big.p(), kMersenne61);
  Elem x = kMersenne61 - 5;
  EXPECT_EQ(big.mul(x, big.inv(x)), 1u);
}

TEST(Ecss, HandCheckedSharesOverF17) {
  // P(x) = 5 + 3x gives shares 8, 11, 14, 0 at x = 1..4.
  PrimeField f(17);
  std::vector<Elem> tape(1 + 2 * 12, 1);
  tape[0] = 3;
  TapeRandomness rnd(tape);
  auto shares = ecss_share(f, 5, 1, 4, rnd);
  std::vector<Elem> values;
  for (const auto& s : shares) values.push_back(s.value);
  EXPECT_EQ(values, (std::vector<Elem>{8, 11, 14, 0}));
  EXPECT_EQ(ecss_recon(f, shares, 1), 5u);
}

TEST(Ecss, ZeroThresholdCarriesSecret) {
  PrimeField f(17);
  CoinStream coins(1, 2);
  StreamRandomness rnd(coins);
  auto shares = ecss_share(f, 9, 0, 3, rnd);
  for (const auto& s : shares) EXPECT_EQ(s.value, 9u);
  EXPECT_EQ(ecss_recon(f, shares, 0), 9u);
}

TEST(Ecss, InvalidThreshold) {
  PrimeField f(17);
  CoinStream coins(1, 2);
  StreamRandomness rnd(coins);
  EXPECT_THROW(ecss_share(f, 1, 2, 4, rnd), InvalidThreshold);
  EXPECT_THROW(ecss_share(f, 1, 1, 2, rnd), InvalidThreshold);
}

TEST(Ecss, SingleGarbageShareOverF17) {
  PrimeField f(17);
  CoinStream coins(3, 4);
  StreamRandomness rnd(coins);
  auto honest = ecss_share(f, 5, 1, 4, rnd);
  for (int j = 0; j < 4; ++j) {
    for (Elem e = 1; e < 17; ++e) {
      auto shares = honest;
      shares[j].value = f.add(shares[j].value, e);
      auto r = ecss_recon_detailed(f, std::vector<std::optional<EcssShare>>(shares.begin(), shares.end()), 1);
      EXPECT_EQ(r.value, 5u);
      EXPECT_EQ(std::count(r.accepted.begin(), r.accepted.end(), j), 0);
    }
  }
}

TEST(Ecss, TooFewAcceptedSharesFails) {
  PrimeField f(17);
  CoinStream coins(5, 6);
  StreamRandomness rnd(coins);
  auto honest = ecss_share(f, 5, 1, 4, rnd);
  std::vector<std::optional<EcssShare>> shares(4);
  shares[0] = honest[0];
  EXPECT_THROW(ecss_recon(f, shares, 1), ReconstructionFailure);
}

TEST(Ecss, ExhaustiveErrorPatternsSmallCases) {
  PrimeField f(17);
  for (auto [t, n] : {std::pair{1, 3}, std::pair{1, 4}}) {
    auto r = sweeps::ecss_error_sweep(f, t, n, 1);
    EXPECT_GT(r.patterns, 0);
    EXPECT_EQ(r.exact, r.patterns) << "t=" << t << " n=" << n;
  }
}

TEST(Ecss, PrivacyOfOneShareOverF7) {
  PrimeField f(7);
  for (int j = 0; j < 3; ++j) {
    auto d0 = sweeps::share_view_distribution(f, 3, j, 0, 1);
    auto d1 = sweeps::share_view_distribution(f, 3, j, 1, 1);
    EXPECT_EQ(d0, d1) << "share " << j;
  }
}

TEST(Ecss, SerialisationRoundTrip) {
  PrimeField f;
  CoinStream coins(7, 8);
  StreamRandomness rnd(coins);
  auto shares = ecss_share(f, 123456789, 2, 5, rnd);
  for (const auto& s : shares) EXPECT_EQ(deserialize_share(serialize_share(s)), s);
  Bytes b = serialize_share(shares[0]);
  EXPECT_EQ(b.size(), 4u + 8u + 4u + 8u * 5 + 4u + 16u * 5);
  b.pop_back();
  EXPECT_THROW(deserialize_share(b), FormatError);
}

TEST(ItSignatures, CompletenessAndConsistency) {
  PrimeField f;
  CoinStream coins(9, 10);
  StreamRandomness rnd(coins);
  auto km = itsig_gen(f, 5, 3, 10, rnd);
  for (Elem m : {Elem{0}, Elem{42}, kMersenne61 - 1}) {
    auto g = itsig_sign(m, km.sk);
    for (auto& vk : km.vks) EXPECT_TRUE(itsig_verify(m, g, vk));
  }
}

TEST(ItSignatures, ConstantShiftIsRejected) {
  PrimeField f;
  CoinStream coins(11, 12);
  StreamRandomness rnd(coins);
  auto km = itsig_gen(f, 4, 2, 4, rnd);
  auto g = itsig_sign(77, km.sk);
  g.coeffs[0] = f.add(g.coeffs[0], 1);
  for (auto& vk : km.vks) EXPECT_FALSE(itsig_verify(77, g, vk));
}

TEST(ItSignatures, CountersEnforceBounds) {
  PrimeField f;
  CoinStream coins(13, 14);
  StreamRandomness rnd(coins);
  auto pki = setup_it_pki(f, 3, 2, 2, rnd);
  auto& sk = pki[0].sk;
  auto s1 = sk.sign(1);
  sk.sign(2);
  EXPECT_THROW(sk.sign(3), KeyExhausted);
  auto& vk = pki[1].vks[0];
  EXPECT_TRUE(vk.verify(1, s1));
  EXPECT_FALSE(vk.verify(2, s1));
  EXPECT_THROW(vk.verify(1, s1), KeyExhausted);
  EXPECT_EQ(vk.uses(), 2);
}

TEST(ItSignatures, RandomForgeriesRejected) {
  PrimeField f;
  CoinStream coins(15, 16);
  StreamRandomness rnd(coins);
  auto km = itsig_gen(f, 4, 2, kUnlimited, rnd);
  int accepted = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    ItSignature g;
    for (int j = 0; j < 4; ++j) g.coeffs.push_back(coins.below(f.p()));
    Elem m = coins.below(f.p());
    for (auto& vk : km.vks) accepted += itsig_verify(m, g, vk);
  }
  EXPECT_EQ(accepted, 0);
}

TEST(ItSignatures, MalformedSignatureRejected) {
  PrimeField f;
  CoinStream coins(17, 18);
  StreamRandomness rnd(coins);
  auto km = itsig_gen(f, 4, 2, 4, rnd);
  auto g = itsig_sign(5, km.sk);
  g.coeffs.pop_back();
  EXPECT_FALSE(itsig_verify(5, g, km.vks[0]));
}

TEST(MultiSignatures, ThresholdRule) {
  PrimeField f;
  CoinStream coins(19, 20);
  StreamRandomness rnd(coins);
  const int m = 5, t = 2;
  auto pki = setup_it_pki(f, m, 4, kUnlimited, rnd);
  std::vector<ItSigningKey*> sks;
  for (auto& s : pki) sks.push_back(&s.sk);
  auto sigma = multi_sign(99, sks);
  std::vector<ItVerificationKey*> mine;
  for (int j = 0; j < m; ++j) mine.push_back(&pki[0].vks[j]);
  EXPECT_TRUE(multi_verify(99, sigma, mine, t));
  auto broken = sigma;
  for (int j = 0; j < t; ++j) broken[j].coeffs[0] = f.add(broken[j].coeffs[0], 1);
  EXPECT_TRUE(multi_verify(99, broken, mine, t));
  broken[t].coeffs[0] = f.add(broken[t].coeffs[0], 1);
  EXPECT_FALSE(multi_verify(99, broken, mine, t));
  EXPECT_FALSE(multi_verify(98, sigma, mine, t));
}

TEST(MultiSignatures, NestedThresholdToleratesBadVerifierKeys) {
  PrimeField f;
  CoinStream coins(21, 22);
  StreamRandomness rnd(coins);
  const int m = 5, t = 2;
  auto pki = setup_it_pki(f, m, 4, kUnlimited, rnd);
  std::vector<ItSigningKey*> sks;
  for (auto& s : pki) sks.push_back(&s.sk);
  auto sigma = multi_sign(7, sks);
  // keys[j] = every party's private key for signer j; the first t parties
  // hand in keys for the wrong signer.
  std::vector<std::vector<ItVerificationKey*>> keys(m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) keys[j].push_back(&pki[i].vks[i < t ? (j + 1) % m : j]);
  }
  EXPECT_TRUE(multi_verify_nested(7, sigma, keys, t));
  EXPECT_FALSE(multi_verify_nested(8, sigma, keys, t));
}

TEST(Election, Examples) {
  EXPECT_EQ(lightest_bin_elect(8, 4, {0, 0, 0, 0, 0, 1, 1, 1}).members, (std::vector<int>{5, 6, 7}));
  EXPECT_EQ(lightest_bin_elect(4, 4, {0, 0, 0, 0}).members, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(lightest_bin_elect(8, 4, {0, 0, 0, 0, 1, 1, 1, 1}).members, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(lightest_bin_elect(8, 2, {9, 0, 1, 1, 2, 2, 3, 3}).members, (std::vector<int>{0, 1}));
}

TEST(Election, CommitteeNeverExceedsBound) {
  CoinStream coins(23, 24);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 4 + static_cast<int>(coins.below(40));
    int np = 1 + static_cast<int>(coins.below(n));
    std::vector<int> choices(n);
    for (auto& c : choices) c = static_cast<int>(coins.below(bin_count(n, np)));
    auto c = lightest_bin_elect(n, np, choices);
    EXPECT_LE(static_cast<int>(c.members.size()), np);
    EXPECT_TRUE(std::is_sorted(c.members.begin(), c.members.end()));
  }
}

TEST(Election, AdversarialMinorityStaysMinority) {
  // Honest parties pick bins uniformly; corrupted ones pile into bin 0
  // except for one that sits alone in the lightest bin it can find.
  const int n = 256, np = 32;
  const double beta = 0.2;
  CoinStream coins(25, 26);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<int> choices(n);
    int bins = bin_count(n, np);
    std::vector<char> bad(n, 0);
    for (int i = 0; i < static_cast<int>(beta * n); ++i) bad[i] = 1;
    for (int i = 0; i < n; ++i) choices[i] = bad[i] ? 0 : static_cast<int>(coins.below(bins));
    auto c = lightest_bin_elect(n, np, choices);
    int corrupted = 0;
    for (int v : c.members) corrupted += bad[v];
    if (!c.members.empty()) worst = std::max(worst, double(corrupted) / c.members.size());
  }
  EXPECT_LE(worst, beta + 0.3);
}

TEST(Setup, PkiShapes) {
  PrimeField f;
  CoinStream coins(27, 28);
  StreamRandomness rnd(coins);
  auto pki = setup_pki(f, 3, rnd);
  ASSERT_EQ(pki.size(), 3u);
  for (const auto& s : pki) EXPECT_EQ(s.vks.size(), 3u);
  auto sig = pki[2].sk.sign(11);
  for (auto& s : pki) EXPECT_TRUE(s.vks[2].verify(11, sig));
}

TEST(Setup, KeyBlobRoundTrip) {
  PrimeField f;
  CoinStream coins(29, 30);
  StreamRandomness rnd(coins);
  auto pki = setup_it_pki(f, 4, 2, 3, rnd);
  pki[1].sk.sign(5);
  auto blob = serialize_setup(pki[1]);
  auto back = deserialize_setup(blob);
  EXPECT_EQ(back.party, 1);
  EXPECT_EQ(back.sk.uses(), 1);
  EXPECT_EQ(serialize_setup(back), blob);
  auto sig = back.sk.sign(6);
  EXPECT_TRUE(pki[0].vks[1].verify(6, sig));
  EXPECT_THROW(back.sk.sign(7), KeyExhausted);
  blob[4] = 9;  // version
  EXPECT_THROW(deserialize_setup(blob), FormatError);
}
