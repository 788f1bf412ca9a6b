#include "commlab/crypto.hpp"

namespace commlab::crypto {

std::vector<EcssShare> ecss_share(const PrimeField& f, Elem m, int t, int n, Randomness& rnd) {
  if (n < 1 || t < 0 || 2 * t >= n) {
    throw InvalidThreshold("ecss: need 0 <= t < n/2, got t=" + std::to_string(t) +
                           " n=" + std::to_string(n));
  }
  if (static_cast<Elem>(n) >= f.p()) throw InvalidThreshold("ecss: field too small for n points");
  std::vector<Elem> poly(t + 1);
  poly[0] = f.reduce(m);
  for (int k = 1; k <= t; ++k) poly[k] = rnd.uniform(f.p());

  std::vector<EcssShare> shares(n);
  for (int j = 0; j < n; ++j) {
    shares[j].index = j;
    shares[j].value = f.eval(poly, static_cast<Elem>(j + 1));
    shares[j].tags.assign(n, 0);
    shares[j].keys.assign(n, MacKey{});
  }
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      MacKey key{rnd.uniform_nonzero(f.p()), 0};
      key.b = rnd.uniform(f.p());
      shares[k].keys[j] = key;
      shares[j].tags[k] = f.add(f.mul(key.a, shares[j].value), key.b);
    }
  }
  return shares;
}

EcssReconstruction ecss_recon_detailed(const PrimeField& f,
                                       const std::vector<std::optional<EcssShare>>& shares, int t) {
  const int n = static_cast<int>(shares.size());
  if (n < 1 || t < 0 || 2 * t >= n) {
    throw InvalidThreshold("ecss: need 0 <= t < n/2, got t=" + std::to_string(t) +
                           " n=" + std::to_string(n));
  }
  auto well_formed = [&](int j) {
    const auto& s = shares[j];
    return s && s->index == j && static_cast<int>(s->tags.size()) == n &&
           static_cast<int>(s->keys.size()) == n && s->value < f.p();
  };
  EcssReconstruction out;
  for (int j = 0; j < n; ++j) {
    if (!well_formed(j)) continue;
    int votes = 1;  // the holder vouches for its own share
    for (int k = 0; k < n; ++k) {
      if (k == j || !well_formed(k)) continue;
      const MacKey& key = shares[k]->keys[j];
      if (f.add(f.mul(key.a % f.p(), shares[j]->value), key.b % f.p()) == shares[j]->tags[k]) ++votes;
    }
    if (votes >= n - t) out.accepted.push_back(j);
  }
  if (static_cast<int>(out.accepted.size()) < t + 1) {
    throw ReconstructionFailure("ecss: only " + std::to_string(out.accepted.size()) +
                                " shares accepted, need " + std::to_string(t + 1));
  }
  std::vector<Elem> xs, ys;
  for (int i = 0; i <= t; ++i) {
    int j = out.accepted[i];
    xs.push_back(static_cast<Elem>(j + 1));
    ys.push_back(shares[j]->value);
  }
  out.value = f.interpolate_at_zero(xs, ys);
  return out;
}

Elem ecss_recon(const PrimeField& f, const std::vector<std::optional<EcssShare>>& shares, int t) {
  return ecss_recon_detailed(f, shares, t).value;
}

Elem ecss_recon(const PrimeField& f, const std::vector<EcssShare>& shares, int t) {
  std::vector<std::optional<EcssShare>> opt(shares.begin(), shares.end());
  return ecss_recon(f, opt, t);
}

}  // namespace commlab::crypto
