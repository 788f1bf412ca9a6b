// Exhaustive ECSS sweeps shared by the unit tests and the acceptance runner.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "commlab/crypto.hpp"

namespace sweeps {

using namespace commlab::crypto;

struct SweepResult {
  long long patterns = 0;
  long long exact = 0;
};

// Every error pattern of weight <= t: a set T of corrupted indices and, per
// corrupted share, either erasure or an additive error e != 0 on its value.
// Corrupted holders also rewrite their MAC keys to vouch for the corrupted
// shares and to reject every honest one.
inline SweepResult ecss_error_sweep(const PrimeField& f, int t, int n, int coin_seeds) {
  SweepResult res;
  const Elem p = f.p();
  for (Elem m = 0; m < p; ++m) {
    for (int seed = 0; seed < coin_seeds; ++seed) {
      commlab::CoinStream coins(1000 + seed, m);
      StreamRandomness rnd(coins);
      const auto honest = ecss_share(f, m, t, n, rnd);
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> bad;
        for (int j = 0; j < n; ++j) {
          if (mask >> j & 1) bad.push_back(j);
        }
        if (static_cast<int>(bad.size()) > t) continue;
        // choice p - 1 + 1 == p encodes erasure; 1..p-1 are additive errors.
        long long combos = 1;
        for (std::size_t i = 0; i < bad.size(); ++i) combos *= static_cast<long long>(p);
        for (long long code = 0; code < combos; ++code) {
          std::vector<std::optional<EcssShare>> shares(honest.begin(), honest.end());
          long long rest = code;
          for (int j : bad) {
            Elem choice = static_cast<Elem>(rest % static_cast<long long>(p)) + 1;
            rest /= static_cast<long long>(p);
            if (choice == p) {
              shares[j].reset();
              continue;
            }
            shares[j]->value = f.add(shares[j]->value, choice);
          }
          for (int k : bad) {
            if (!shares[k]) continue;
            for (int j = 0; j < n; ++j) {
              if (j == k) continue;
              MacKey& key = shares[k]->keys[j];
              bool j_bad = std::find(bad.begin(), bad.end(), j) != bad.end();
              if (j_bad && shares[j]) {
                key.b = f.sub(shares[j]->tags[k], f.mul(key.a, shares[j]->value));
              } else {
                key.b = f.add(key.b, 1);
              }
            }
          }
          ++res.patterns;
          try {
            if (ecss_recon(f, shares, t) == m) ++res.exact;
          } catch (const ReconstructionFailure&) {
          }
        }
      }
    }
  }
  return res;
}

// View of share j: its value, the tags on it, and the keys it holds.
using View = std::vector<Elem>;

inline View view_of(const EcssShare& s) {
  View v{s.value};
  for (std::size_t k = 0; k < s.tags.size(); ++k) {
    if (static_cast<int>(k) == s.index) continue;
    v.push_back(s.tags[k]);
    v.push_back(s.keys[k].a);
    v.push_back(s.keys[k].b);
  }
  return v;
}

// Distribution of share j's view for secret m, enumerated over every coin
// that can influence it: the t = 1 Shamir coefficient and the MAC keys the
// other holders use on share j. The keys held by j are independent of m; they
// are swept over `held_settings` fixed values.
inline std::map<View, long long> share_view_distribution(const PrimeField& f, int n, int j, Elem m,
                                                         int held_settings) {
  const Elem p = f.p();
  std::map<View, long long> dist;
  // Tape layout: r, then (a_{k,i} - 1, b_{k,i}) for k = 0..n-1, i != k.
  std::vector<std::pair<int, int>> pair_pos;  // (k, i) in tape order
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      if (i != k) pair_pos.emplace_back(k, i);
    }
  }
  std::vector<std::size_t> free_pairs;
  for (std::size_t q = 0; q < pair_pos.size(); ++q) {
    if (pair_pos[q].second == j) free_pairs.push_back(q);
  }
  long long per_pair = static_cast<long long>((p - 1) * p);
  long long total = static_cast<long long>(p);
  for (std::size_t i = 0; i < free_pairs.size(); ++i) total *= per_pair;
  for (int held = 0; held < held_settings; ++held) {
    for (long long code = 0; code < total; ++code) {
      std::vector<Elem> tape(1 + 2 * pair_pos.size(), 0);
      long long rest = code;
      tape[0] = static_cast<Elem>(rest % static_cast<long long>(p));
      rest /= static_cast<long long>(p);
      for (std::size_t q = 0; q < pair_pos.size(); ++q) {
        tape[1 + 2 * q] = static_cast<Elem>((held + q) % (p - 1));
        tape[2 + 2 * q] = static_cast<Elem>((3 * held + q) % p);
      }
      for (std::size_t q : free_pairs) {
        long long c = rest % per_pair;
        rest /= per_pair;
        tape[1 + 2 * q] = static_cast<Elem>(c % static_cast<long long>(p - 1));
        tape[2 + 2 * q] = static_cast<Elem>(c / static_cast<long long>(p - 1));
      }
      TapeRandomness rnd(tape);
      auto shares = ecss_share(f, m, 1, n, rnd);
      ++dist[view_of(shares[j])];
    }
  }
  return dist;
}

}  // namespace sweeps
