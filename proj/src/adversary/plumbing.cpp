#include <algorithm>
#include <numeric>

#include "commlab/adversary.hpp"

namespace commlab::adversary {

using netsim::AdversaryContext;
using netsim::Outgoing;
namespace ne = protocols::ne;

PassiveStatic::PassiveStatic(std::vector<int> fixed, int max_corrupt)
    : fixed_(std::move(fixed)), max_corrupt_(max_corrupt) {}

void PassiveStatic::start(AdversaryContext& ctx) {
  set_ = fixed_;
  if (max_corrupt_ >= 0) {
    CoinStream pick = ctx.coins().derive(7);
    const int k = static_cast<int>(pick.below(static_cast<std::uint64_t>(max_corrupt_) + 1));
    std::vector<int> all(ctx.n());
    std::iota(all.begin(), all.end(), 0);
    for (int i = 0; i < k && i < ctx.n(); ++i) {
      const auto j = i + static_cast<int>(pick.below(static_cast<std::uint64_t>(ctx.n() - i)));
      std::swap(all[i], all[j]);
    }
    set_.assign(all.begin(), all.begin() + std::min(k, ctx.n()));
  }
  std::sort(set_.begin(), set_.end());
  set_.erase(std::unique(set_.begin(), set_.end()), set_.end());
  for (int p : set_) ctx.corrupt(p);
}

NeMalicious::NeMalicious(std::vector<int> fixed, int max_corrupt, int kappa, std::uint64_t prime)
    : PassiveStatic(std::move(fixed), max_corrupt), kappa_(kappa), prime_(prime) {}

Bytes NeMalicious::substitute(AdversaryContext& ctx, int party) {
  auto it = substituted_.find(party);
  if (it != substituted_.end()) return it->second;
  Bytes x(kappa_);
  for (auto& b : x) b = ctx.coins().bit() ? 1 : 0;
  substituted_[party] = x;
  return x;
}

void NeMalicious::garble(AdversaryContext& ctx, ne::ShareVector& v) {
  auto& c = ctx.coins();
  for (auto& bits : v) {
    for (auto& s : bits) {
      s.value = c.below(prime_);
      for (auto& t : s.tags) t = c.below(prime_);
      for (auto& k : s.keys) k = {1 + c.below(prime_ - 1), c.below(prime_)};
    }
  }
}

std::optional<Bytes> NeMalicious::ideal_input(AdversaryContext& ctx, int, const std::string& fid, int party,
                                              std::optional<Bytes> proposed) {
  if (!proposed) return proposed;
  try {
    if (fid == ne::kElectShare) {
      auto in = ne::decode_elect_share_input(*proposed);
      in.x = substitute(ctx, party);
      return ne::encode(in);
    }
    if (fid == ne::kReconCompute) {
      auto in = ne::decode_recon_input(*proposed);
      in.x = substitute(ctx, party);
      garble(ctx, in.shares);
      return ne::encode(in);
    }
    if (fid == ne::kOutDist) {
      auto in = ne::decode_out_dist_input(*proposed);
      if (in.candidate) {
        for (auto& b : *in.candidate) b ^= 1;
      }
      return ne::encode(in);
    }
  } catch (const std::exception&) {
    return proposed;
  }
  return proposed;
}

void NeMalicious::corrupted_sends(AdversaryContext& ctx, int round, int, std::vector<Outgoing>& out) {
  const std::string pid = ctx.protocol().id();
  if (pid != "pi_ne" && pid != "pi_a_ne") return;
  for (auto& o : out) {
    try {
      if (round == 0 && pid == "pi_ne") {
        auto m = ne::decode_bridge(o.payload);
        if (m.shares) garble(ctx, *m.shares);
        o.payload = ne::encode(m);
      } else if (round == 0) {
        auto m = ne::decode_index_bridge(o.payload);
        garble(ctx, m.shares);
        o.payload = ne::encode(m);
      } else if (round == 1) {
        for (auto& b : o.payload) b ^= 1;
      }
    } catch (const std::exception&) {
    }
  }
}

bool committee_supermajority(const protocols::CommitteeRecord& rec, const std::vector<bool>& corrupted, int m,
                             int n_prime, double delta) {
  const double bound = (0.5 - delta) * n_prime;
  int left = 0, right = 0;
  for (int i : rec.c1) left += corrupted.at(i) ? 1 : 0;
  for (int i : rec.c2) right += corrupted.at(m + i) ? 1 : 0;
  return left >= bound - 1e-9 || right >= bound - 1e-9;
}

std::vector<std::string> adversary_ids() {
  return {"none", "passive", "ne-malicious", "isolate-honest", "isolate-corrupt"};
}

std::shared_ptr<netsim::Adversary> make_adversary(const AdversarySpec& spec) {
  if (spec.id == "none") return nullptr;
  if (spec.id == "passive") return std::make_shared<PassiveStatic>(spec.corrupt, spec.max_corrupt);
  if (spec.id == "ne-malicious") {
    return std::make_shared<NeMalicious>(spec.corrupt, spec.max_corrupt, spec.attack.kappa, spec.prime);
  }
  if (spec.id == "isolate-honest") return std::make_shared<IsolationAttack>(Strategy::honest_istar, spec.attack);
  if (spec.id == "isolate-corrupt") return std::make_shared<IsolationAttack>(Strategy::corrupt_istar, spec.attack);
  throw std::invalid_argument("unknown adversary: " + spec.id);
}

}  // namespace commlab::adversary
