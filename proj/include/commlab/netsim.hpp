#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "commlab/coins.hpp"
#include "commlab/graphkit.hpp"

namespace commlab::netsim {

using Bytes = std::vector<std::uint8_t>;

enum class ChannelModel { secure, authenticated, hidden };
enum class HonestyRule { at_event, at_output };
enum class IdealMode { oracle, clique };

std::string to_string(ChannelModel m);
std::string to_string(HonestyRule r);
std::string to_string(IdealMode m);
ChannelModel parse_channel(const std::string& s);
HonestyRule parse_honesty(const std::string& s);
IdealMode parse_ideal_mode(const std::string& s);

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ProtocolViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RunawayProtocol : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UndefinedLocality : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Outgoing {
  int to = 0;
  Bytes payload;
};

struct Incoming {
  int from = 0;
  Bytes payload;
};

// Next-message logic of one party.
class PartyMachine {
 public:
  virtual ~PartyMachine() = default;
  virtual std::vector<Outgoing> send(int round) = 0;
  // Receive-phase filter; rejected messages are never processed.
  virtual bool accept(int /*round*/, const Incoming& /*msg*/) { return true; }
  virtual void receive(int round, const std::vector<Incoming>& processed) = 0;
  virtual std::optional<Bytes> ideal_input(int /*round*/, const std::string& /*fid*/) {
    return std::nullopt;
  }
  virtual void ideal_output(int /*round*/, const std::string& /*fid*/, const Bytes& /*out*/) {}
  virtual bool finished() const = 0;
  virtual std::optional<Bytes> output() const = 0;
};

struct IdealCallSpec {
  std::string fid;
  std::vector<int> participants;  // sorted
};

class Protocol {
 public:
  virtual ~Protocol() = default;
  virtual std::string id() const = 0;
  virtual int n() const = 0;
  // Samples the setup strings; must be a pure function of the coins.
  virtual void setup(CoinStream& /*coins*/) {}
  virtual Bytes setup_string(int /*party*/) const { return {}; }
  virtual std::unique_ptr<PartyMachine> make_party(int party, const Bytes& input,
                                                   CoinStream coins) = 0;
  virtual std::vector<IdealCallSpec> ideal_calls(int /*round*/) const { return {}; }
  // inputs[p] is nullopt when p supplied nothing.
  virtual std::map<int, Bytes> run_functionality(const std::string& fid, int round,
                                                 const std::map<int, std::optional<Bytes>>& inputs,
                                                 CoinStream& coins);
};

struct Leak {
  int round = 0;
  int from = 0;
  int to = 0;
  std::size_t length = 0;
  const Bytes* content = nullptr;  // null when only the length leaks
};

class AdversaryContext;

// Hooks fire in a fixed order; see run_instance.
class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual std::string id() const = 0;
  virtual void start(AdversaryContext&) {}
  virtual void round_begin(AdversaryContext&, int /*round*/) {}
  virtual std::optional<Bytes> ideal_input(AdversaryContext&, int /*round*/, const std::string& /*fid*/,
                                           int /*party*/, std::optional<Bytes> proposed) {
    return proposed;
  }
  virtual void ideal_output(AdversaryContext&, int /*round*/, const std::string& /*fid*/, int /*party*/,
                            const Bytes& /*out*/) {}
  virtual void on_leak(AdversaryContext&, const Leak&) {}
  // After every leak of the round, before corrupted senders' vectors are fixed.
  virtual void input_end(AdversaryContext&, int /*round*/) {}
  virtual void corrupted_sends(AdversaryContext&, int /*round*/, int /*party*/,
                               std::vector<Outgoing>& /*out*/) {}
  virtual void corrupted_receive(AdversaryContext&, int /*round*/, int /*party*/,
                                 std::vector<Incoming>& /*in*/) {}
  virtual void round_end(AdversaryContext&, int /*round*/) {}
  virtual void post_execution(AdversaryContext&) {}
};

enum class Subphase { setup = 0, ideal = 1, input = 2, output = 3, post = 4 };
std::string to_string(Subphase s);

enum class EventKind { send, filter_drop, processed, corrupt, ideal_output, output };
std::string to_string(EventKind k);

struct Event {
  EventKind kind = EventKind::send;
  int round = 0;
  Subphase phase = Subphase::setup;
  int party = -1;  // sender (send), receiver (processed, filter_drop, ideal_output, output), victim (corrupt)
  int peer = -1;   // receiver (send), sender (processed, filter_drop)
  Bytes payload;
  bool honest = true;  // send: sender honest at send; processed: receiver honest
  bool ideal = false;  // edge produced by a clique-mode ideal call
  std::string note;    // drop reason, corruption origin, functionality id

  friend bool operator==(const Event&, const Event&) = default;
};

struct Trace {
  int n = 0;
  std::string protocol;
  std::string adversary;
  ChannelModel channel = ChannelModel::secure;
  HonestyRule honesty = HonestyRule::at_event;
  std::uint64_t seed = 0;
  int rounds = 0;
  int budget = 0;
  std::vector<Bytes> inputs;
  std::vector<Bytes> setup;                  // serialised setup string per party
  std::vector<std::uint64_t> coin_ids;       // fingerprint of each party's coin stream
  std::vector<Event> events;
  std::vector<std::optional<Bytes>> outputs; // honest parties only
  std::vector<bool> corrupted_at_output;
  std::vector<bool> corrupted_final;         // including post-execution corruptions

  std::string to_ndjson() const;
  static Trace from_ndjson(const std::string& text);
};

struct ExecutionInstance {
  std::shared_ptr<Protocol> protocol;
  std::shared_ptr<Adversary> adversary;  // null: no adversary
  std::vector<int> static_corrupt;       // corrupted before round 0
  int budget = 0;                        // t: total corruptions allowed
  int kappa = 8;
  ChannelModel channel = ChannelModel::secure;
  HonestyRule honesty = HonestyRule::at_event;
  IdealMode ideal_mode = IdealMode::clique;
  std::vector<Bytes> inputs;
  std::uint64_t seed = 0;
  int max_rounds = 256;
  // Replaces party_coins(seed, p) for the listed parties.
  std::map<int, CoinStream> coin_override;
};

// Coin stream labels derived from the master seed.
inline constexpr std::uint64_t kAdversaryStream = std::uint64_t{1} << 32;
inline constexpr std::uint64_t kSetupStream = kAdversaryStream + 1;
inline constexpr std::uint64_t kFunctionalityStream = kAdversaryStream + 2;
CoinStream party_coins(std::uint64_t seed, int party);
std::uint64_t coin_fingerprint(std::uint64_t seed, int party);

class Engine;

// The adversary's handle on a running execution.
class AdversaryContext {
 public:
  explicit AdversaryContext(Engine& engine) : engine_(engine) {}
  int n() const;
  int round() const;
  Subphase phase() const;
  int budget() const;
  int corruptions() const;
  int remaining() const { return budget() - corruptions(); }
  bool is_corrupted(int party) const;
  // Throws BudgetExceeded on corruption number budget + 1.
  void corrupt(int party);
  // Outgoing messages of a corrupted party for the current round.
  const std::vector<Outgoing>& pending(int party) const;
  // Replace (or drop, with nullopt) the message from a corrupted sender.
  void replace(int from, int to, std::optional<Bytes> payload);
  const Bytes& input(int party) const;  // corrupted parties only
  CoinStream party_coins(int party) const;  // corrupted parties only, unused copy
  CoinStream& coins();
  Protocol& protocol();
  ChannelModel channel() const;

 private:
  Engine& engine_;
};

Trace run_instance(const ExecutionInstance& inst);

struct PsmtResult {
  std::vector<std::vector<Incoming>> delivered;  // per receiver, by sender index
  std::vector<Event> events;
  std::vector<bool> corrupted;
};

// One parallel-SMT round in isolation: leakage, corruption window and
// replacement, then atomic delivery. sends[i] is party i's outgoing vector.
PsmtResult psmt_round(int round, std::vector<std::vector<Outgoing>> sends, ChannelModel channel,
                      std::vector<bool> corrupted, int budget, Adversary* adv);

// Receive filter sub-phase, exposed for direct testing.
std::vector<Incoming> receive_filter(PartyMachine& receiver, int receiver_id, int round,
                                     const std::vector<Incoming>& incoming, bool honest,
                                     std::vector<Event>& log);

struct DirectedGraph {
  int n = 0;
  std::set<std::pair<int, int>> arcs;
};

struct CommGraphs {
  DirectedGraph out;
  DirectedGraph in;
  graphkit::CommGraph full;
};

CommGraphs build_graphs(const Trace& trace);
CommGraphs build_graphs(const Trace& trace, HonestyRule rule);

struct Locality {
  std::vector<int> per_party;  // -1 for corrupted parties
  int max = 0;
};
Locality locality(const Trace& trace);

std::vector<bool> honest_parties(const Trace& trace);

struct RoundView {
  int round = 0;
  std::vector<std::pair<int, Bytes>> sent;       // (to, payload)
  std::vector<std::pair<int, Bytes>> processed;  // (from, payload)
  std::vector<std::pair<std::string, Bytes>> ideal;
};

struct PartyView {
  int party = 0;
  Bytes input;
  std::uint64_t coins = 0;
  Bytes setup;
  std::vector<RoundView> rounds;

  Bytes serialize() const;
};

PartyView party_view(const Trace& trace, int party);

std::string hex(const Bytes& b);
Bytes unhex(const std::string& s);

}  // namespace commlab::netsim
