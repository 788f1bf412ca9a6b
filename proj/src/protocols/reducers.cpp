#include <cmath>
#include <stdexcept>

#include "commlab/protocols.hpp"

namespace commlab::protocols {

Bytes normalise_input(const Bytes& x, int kappa) {
  if (static_cast<int>(x.size()) != kappa) return Bytes(kappa, 0);
  for (auto b : x) {
    if (b > 1) return Bytes(kappa, 0);
  }
  return x;
}

std::vector<std::string> reducer_ids() { return {"xor", "concat", "majority"}; }

Bytes reduce(const std::string& reducer, const std::vector<Bytes>& inputs, int kappa) {
  std::vector<Bytes> x;
  x.reserve(inputs.size());
  for (const auto& in : inputs) x.push_back(normalise_input(in, kappa));
  if (reducer == "xor") {
    Bytes y(kappa, 0);
    for (const auto& xi : x) {
      for (int b = 0; b < kappa; ++b) y[b] ^= xi[b];
    }
    return y;
  }
  if (reducer == "concat") {
    Bytes y;
    for (const auto& xi : x) y.insert(y.end(), xi.begin(), xi.end());
    return y;
  }
  if (reducer == "majority") {
    Bytes y(kappa, 0);
    for (int b = 0; b < kappa; ++b) {
      std::size_t ones = 0;
      for (const auto& xi : x) ones += xi[b];
      y[b] = 2 * ones > x.size() ? 1 : 0;
    }
    return y;
  }
  throw std::invalid_argument("unknown reducer: " + reducer);
}

int default_committee_size(int n) {
  int l = static_cast<int>(std::ceil(std::log2(static_cast<double>(n))));
  return l * l;
}

NeParams ne_params(const ProtocolParams& p, bool adaptive) {
  NeParams q;
  q.n = p.n;
  if (p.n < 2 || p.n % 2) throw std::invalid_argument("committee protocols need even n >= 2");
  q.m = p.n / 2;
  if (q.m > 60) throw std::invalid_argument("committee protocols support n <= 120");
  q.n_prime = p.committee > 0 ? p.committee : default_committee_size(p.n);
  if (q.n_prime > q.m) {
    throw std::invalid_argument("committee size " + std::to_string(q.n_prime) + " exceeds m = " +
                                std::to_string(q.m));
  }
  if (!(p.delta > 0 && p.delta < 0.5)) throw std::invalid_argument("delta must lie in (0, 1/2)");
  q.delta = p.delta;
  q.t_prime = static_cast<int>(std::floor((0.5 - p.delta) * q.n_prime + 1e-9));
  if (2 * q.t_prime >= q.n_prime) throw std::invalid_argument("t' must be below n'/2");
  q.sig_t = p.sig_threshold >= 0
                ? p.sig_threshold
                : std::max(0, static_cast<int>(std::floor((0.25 - p.delta) * p.n + 1e-9)));
  q.ell_s = adaptive ? 2 * q.n_prime : 2;
  q.ell_v = p.ell_v > 0 ? p.ell_v : 2 * q.n_prime + 2;
  return q;
}

}  // namespace commlab::protocols
