#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "commlab/graphkit.hpp"
#include "commlab/netsim.hpp"
#include "commlab/protocols.hpp"

namespace commlab::adversary {

using netsim::Bytes;
using graphkit::VertexSet;

// ---------------------------------------------------------------------------
// Parameters of the isolation attacks.

struct AttackParams {
  double beta = 0.25;  // budget t = floor(beta n)
  int alpha = -1;      // -1: ceil(sqrt(n))
  int threshold = -1;  // degree threshold; -1: ceil(beta n / 4)
  int kappa = 8;       // input length used for the virtual parties
};

int default_alpha(int n);
int degree_threshold(int n, double beta);
// Smallest c with beta_1 / 2 >= 1 / c, beta_1 = beta / 4.
int island_count_bound(double beta);
int budget_of(int n, double beta);

struct ResolvedParams {
  int n = 0;
  int budget = 0;
  int alpha = 0;
  int threshold = 0;
  int c = 0;
  int kappa = 0;
  double beta = 0;
};
ResolvedParams resolve(const AttackParams& p, int n);

// Coins of the attack, all drawn from sub-streams of the adversary stream so
// the red and blue executions can be replayed from the seed alone.
struct AttackCoins {
  int istar = 0;
  std::vector<Bytes> tilde;  // x~_j for every j (x~_istar feeds the red execution)
};
AttackCoins attack_coins(std::uint64_t seed, int n, int kappa);
CoinStream red_virtual_coins(std::uint64_t seed);           // P~_istar
CoinStream blue_virtual_coins(std::uint64_t seed, int party);  // Q~_j

// ---------------------------------------------------------------------------
// Red and blue honest executions and the events defined on them.

// Red: real inputs and coins, except P~_istar on x~_istar with red coins.
netsim::ExecutionInstance red_instance(std::shared_ptr<netsim::Protocol> proto,
                                       const std::vector<Bytes>& inputs, std::uint64_t seed,
                                       int kappa);
// Blue: Q~_j on x~_j with blue coins, the real P_istar on x_istar.
netsim::ExecutionInstance blue_instance(std::shared_ptr<netsim::Protocol> proto,
                                        const std::vector<Bytes>& inputs, std::uint64_t seed,
                                        int kappa);

// First round at which each party's G_full degree reaches `threshold`
// (-1: never).
std::vector<int> threshold_rounds(const netsim::Trace& trace, int threshold);

struct EventFlags {
  bool e1 = false;  // istar weakly last in both executions
  bool e2 = false;  // red threshold no later than blue
  int red_round = -1;
  int blue_round = -1;
};
EventFlags detect_events(const netsim::Trace& red, const netsim::Trace& blue, int istar,
                         int threshold);

// Smallest alpha-cut of g in canonical order, if any.
struct FinalCutRecord {
  std::optional<graphkit::Cut> cut;
  friend bool operator==(const FinalCutRecord&, const FinalCutRecord&) = default;
};
FinalCutRecord final_cut(const graphkit::CommGraph& g, std::int64_t alpha);

// ---------------------------------------------------------------------------
// The two isolation strategies.

enum class Strategy { honest_istar, corrupt_istar };
std::string to_string(Strategy s);

enum class Phase { I = 1, II = 2, III = 3 };

struct PhaseMark {
  int round = -1;
  int message = -1;  // index in the round's (sender, receiver) order
  friend bool operator==(const PhaseMark&, const PhaseMark&) = default;
};

struct LedgerEntry {
  int party = 0;
  int round = 0;
  int phase = 1;
  std::string reason;  // red, blue, istar, isolate, block
};

struct PairCounter {
  int a = 0;  // island indices, a < b
  int b = 0;
  int blocked_edges = 0;
  int processed_while_active = 0;
};

struct AttackReport {
  Strategy strategy = Strategy::honest_istar;
  ResolvedParams params;
  int istar = 0;
  std::optional<PhaseMark> phase2;
  std::optional<PhaseMark> phase3;
  std::string failure;  // empty, "blue-first", "budget", "partition"
  std::vector<LedgerEntry> ledger;
  int red_corruptions = 0;   // Phase I ledgers
  int blue_corruptions = 0;
  int max_corruptions = 0;   // running maximum of the engine count
  int red_degree = 0;        // of P~_istar at the end of Phase I
  int blue_degree = 0;       // of P_istar in blue at the end of Phase I
  int real_degree = 0;       // of P_istar in the real execution at Phase III entry
  std::vector<VertexSet> gamma1;
  std::vector<VertexSet> gamma2;
  int merged_island = -1;    // island of gamma1 that absorbed istar
  int merged_edges = 0;      // its edges to istar at Phase III entry
  bool merge_precondition = false;  // merged_edges > alpha
  std::vector<PairCounter> pairs;
  // Filled in after the run.
  std::optional<EventFlags> flags;
  FinalCutRecord final_cut;
  bool final_cut_known = false;
};

std::string to_json(const AttackReport& r);

class IsolationAttack : public netsim::Adversary {
 public:
  IsolationAttack(Strategy s, AttackParams p);
  ~IsolationAttack() override;

  std::string id() const override;
  void start(netsim::AdversaryContext& ctx) override;
  void round_begin(netsim::AdversaryContext& ctx, int round) override;
  void on_leak(netsim::AdversaryContext& ctx, const netsim::Leak& leak) override;
  void input_end(netsim::AdversaryContext& ctx, int round) override;
  void corrupted_sends(netsim::AdversaryContext& ctx, int round, int party,
                       std::vector<netsim::Outgoing>& out) override;
  void corrupted_receive(netsim::AdversaryContext& ctx, int round, int party,
                         std::vector<netsim::Incoming>& in) override;
  void round_end(netsim::AdversaryContext& ctx, int round) override;

  const AttackReport& report() const;
  Phase phase() const;

 private:
  struct State;
  std::unique_ptr<State> st_;
};

// Runs one attacked execution together with its red and blue replays.
struct AttackRun {
  netsim::Trace trace;
  AttackReport report;
  netsim::Trace red;
  netsim::Trace blue;
};
AttackRun run_attack(const std::string& protocol_id, const protocols::ProtocolParams& pp,
                     Strategy s, const AttackParams& ap, const std::vector<Bytes>& inputs,
                     std::uint64_t seed, bool replays = true);

// Paired corrupt-istar runs on x and x' (differing at istar only).
struct ViewCheck {
  bool comparable = false;
  bool identical = false;
  std::string reason;
  int istar = 0;
  std::vector<int> checked;  // honest parties across the final cut
  std::vector<int> differing;
};
ViewCheck view_independence_check(const std::string& protocol_id,
                                  const protocols::ProtocolParams& pp, const AttackParams& ap,
                                  std::uint64_t seed, const std::vector<Bytes>& x,
                                  const std::vector<Bytes>& x_prime);

// ---------------------------------------------------------------------------
// Plumbing adversaries.

// Corrupts a fixed or sampled static set and leaves it running honestly.
class PassiveStatic : public netsim::Adversary {
 public:
  // max_corrupt < 0: corrupt exactly `fixed`; otherwise sample a set of
  // uniform size in [0, max_corrupt].
  PassiveStatic(std::vector<int> fixed, int max_corrupt = -1);
  std::string id() const override { return "passive"; }
  void start(netsim::AdversaryContext& ctx) override;
  const std::vector<int>& corrupted() const { return set_; }

 protected:
  std::vector<int> fixed_;
  int max_corrupt_;
  std::vector<int> set_;
};

// Static malicious adversary against the committee protocols: substitutes
// inputs, garbles shares and MAC keys, lies about y and about candidates.
class NeMalicious : public PassiveStatic {
 public:
  NeMalicious(std::vector<int> fixed, int max_corrupt, int kappa,
              std::uint64_t prime = crypto::kMersenne61);
  std::string id() const override { return "ne-malicious"; }
  std::optional<Bytes> ideal_input(netsim::AdversaryContext& ctx, int round, const std::string& fid,
                                   int party, std::optional<Bytes> proposed) override;
  void corrupted_sends(netsim::AdversaryContext& ctx, int round, int party,
                       std::vector<netsim::Outgoing>& out) override;

  // Inputs the functionalities actually used for corrupted parties.
  const std::map<int, Bytes>& substituted() const { return substituted_; }

 private:
  Bytes substitute(netsim::AdversaryContext& ctx, int party);
  void garble(netsim::AdversaryContext& ctx, protocols::ne::ShareVector& v);

  int kappa_;
  std::uint64_t prime_;
  std::map<int, Bytes> substituted_;
};

// |C_1 cap I| or |C_2 cap I| reaches (1/2 - delta) n'.
bool committee_supermajority(const protocols::CommitteeRecord& rec, const std::vector<bool>& corrupted,
                             int m, int n_prime, double delta);

struct AdversarySpec {
  std::string id = "none";
  AttackParams attack;
  std::vector<int> corrupt;  // fixed static set
  int max_corrupt = -1;      // sampled static set
  std::uint64_t prime = crypto::kMersenne61;
};
std::vector<std::string> adversary_ids();
// Null for "none".
std::shared_ptr<netsim::Adversary> make_adversary(const AdversarySpec& spec);

}  // namespace commlab::adversary
