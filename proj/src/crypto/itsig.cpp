#include "commlab/crypto.hpp"

namespace commlab::crypto {

ItSigningKey::ItSigningKey(PrimeField f, int ell_s, std::vector<std::vector<Elem>> a)
    : field_(f), ell_s_(ell_s), a_(std::move(a)) {}

ItSignature ItSigningKey::sign(Elem m) {
  if (uses_ >= ell_s_) {
    throw KeyExhausted("signing key used " + std::to_string(uses_) + " times, bound " +
                       std::to_string(ell_s_));
  }
  ++uses_;
  ItSignature g;
  g.coeffs.reserve(a_.size());
  const Elem x = field_.reduce(m);
  for (const auto& row : a_) g.coeffs.push_back(field_.eval(row, x));
  return g;
}

ItVerificationKey::ItVerificationKey(PrimeField f, int ell_v, std::vector<Elem> v,
                                     std::vector<Elem> fv)
    : field_(f), ell_v_(ell_v), v_(std::move(v)), fv_(std::move(fv)) {}

bool ItVerificationKey::verify(Elem m, const ItSignature& g) {
  if (uses_ >= ell_v_) {
    throw KeyExhausted("verification key used " + std::to_string(uses_) + " times, bound " +
                       std::to_string(ell_v_));
  }
  ++uses_;
  if (g.coeffs.size() != v_.size() + 1) return false;
  Elem lhs = field_.reduce(g.coeffs[0]);
  for (std::size_t j = 0; j < v_.size(); ++j) {
    lhs = field_.add(lhs, field_.mul(field_.reduce(g.coeffs[j + 1]), v_[j]));
  }
  return lhs == field_.eval(fv_, field_.reduce(m));
}

ItKeyMaterial itsig_gen(const PrimeField& f, int n, int ell_s, int ell_v, Randomness& rnd) {
  if (n < 1 || ell_s < 1 || ell_v < 1) throw std::invalid_argument("itsig_gen: bad parameters");
  std::vector<std::vector<Elem>> a(n, std::vector<Elem>(ell_s + 1));
  for (auto& row : a) {
    for (auto& c : row) c = rnd.uniform(f.p());
  }
  ItKeyMaterial km;
  km.vks.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<Elem> v(n - 1);
    for (auto& c : v) c = rnd.uniform(f.p());
    std::vector<Elem> fv(ell_s + 1);
    for (int k = 0; k <= ell_s; ++k) {
      Elem acc = a[0][k];
      for (int j = 1; j < n; ++j) acc = f.add(acc, f.mul(a[j][k], v[j - 1]));
      fv[k] = acc;
    }
    km.vks.emplace_back(f, ell_v, std::move(v), std::move(fv));
  }
  km.sk = ItSigningKey(f, ell_s, std::move(a));
  return km;
}

ItSignature itsig_sign(Elem m, ItSigningKey& sk) { return sk.sign(m); }

bool itsig_verify(Elem m, const ItSignature& g, ItVerificationKey& vk) { return vk.verify(m, g); }

MultiSignature multi_sign(Elem m, const std::vector<ItSigningKey*>& keys) {
  MultiSignature sigma;
  sigma.reserve(keys.size());
  for (ItSigningKey* k : keys) sigma.push_back(k->sign(m));
  return sigma;
}

bool multi_verify(Elem m, const MultiSignature& sigma, const std::vector<ItVerificationKey*>& keys,
                  int t) {
  int pass = 0;
  for (std::size_t i = 0; i < keys.size() && i < sigma.size(); ++i) {
    if (keys[i] && keys[i]->verify(m, sigma[i])) ++pass;
  }
  return pass >= static_cast<int>(keys.size()) - t;
}

bool multi_verify_nested(Elem m, const MultiSignature& sigma,
                         const std::vector<std::vector<ItVerificationKey*>>& keys, int t) {
  int pass = 0;
  for (std::size_t i = 0; i < keys.size() && i < sigma.size(); ++i) {
    int ok = 0;
    for (ItVerificationKey* vk : keys[i]) {
      if (vk && vk->verify(m, sigma[i])) ++ok;
    }
    if (ok >= static_cast<int>(keys[i].size()) - t) ++pass;
  }
  return pass >= static_cast<int>(keys.size()) - t;
}

}  // namespace commlab::crypto
