#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "commlab/crypto.hpp"
#include "commlab/netsim.hpp"

namespace commlab::protocols {

using netsim::Bytes;

struct ProtocolParams {
  int n = 16;
  int kappa = 8;
  int committee = 4;        // n'
  double delta = 0.125;
  int sig_threshold = -1;   // -1: floor((1/4 - delta) n)
  int ell_v = -1;           // -1: 2 n' + 2
  std::string reducer = "xor";
  std::uint64_t prime = crypto::kMersenne61;
  int bridges = 2;          // strawman bridge pairs
};

struct NeParams {
  int n = 0;
  int m = 0;        // n / 2
  int n_prime = 0;  // committee size
  int t_prime = 0;  // floor((1/2 - delta) n')
  double delta = 0;
  int sig_t = 0;
  int ell_s = 0;
  int ell_v = 0;
};

// Validates and fills the derived fields; throws std::invalid_argument.
NeParams ne_params(const ProtocolParams& p, bool adaptive);
int default_committee_size(int n);  // ceil(log2(n))^2

// ---------------------------------------------------------------------------
// Reducers: pure functions of the full input vector. Invalid inputs (wrong
// length or a byte other than 0/1) are replaced by the all-zero default.
Bytes normalise_input(const Bytes& x, int kappa);
Bytes reduce(const std::string& reducer, const std::vector<Bytes>& inputs, int kappa);
std::vector<std::string> reducer_ids();

// ---------------------------------------------------------------------------
// Registry.
std::shared_ptr<netsim::Protocol> make_protocol(const std::string& id, const ProtocolParams& p);
std::vector<std::string> protocol_ids();

// Committees chosen by the elect-share functionality of the last run, for
// diagnostics. Empty for protocols without committees.
struct CommitteeRecord {
  std::vector<int> c1;  // left indices
  std::vector<int> c2;  // indices in [m]; party m + i
};
std::optional<CommitteeRecord> committees_of(const netsim::Protocol& p);

// ---------------------------------------------------------------------------
// Parallel broadcast outputs: n claims of kappa bytes, concatenated.
std::vector<Bytes> split_claims(const Bytes& out, int n, int kappa);

struct BroadcastCheck {
  bool agreement = true;  // all honest outputs equal
  bool validity = true;   // honest coordinates match honest inputs
  std::vector<int> invalid_coordinates;
};
BroadcastCheck check_broadcast(const netsim::Trace& trace, int kappa);

// Claim lists carried by the broadcast protocols.
struct Claim {
  int origin = 0;
  Bytes value;
};
Bytes encode_claims(const std::vector<Claim>& claims);
std::optional<std::vector<Claim>> decode_claims(const Bytes& b, int n, int kappa);

// ---------------------------------------------------------------------------
// Wire formats of the committee protocols, exposed for adversaries.
namespace ne {

using crypto::EcssShare;
using crypto::MultiSignature;

std::uint64_t subset_mask(const std::vector<int>& s);
std::vector<int> mask_subset(std::uint64_t mask);

// shares[i][b]: share of bit b of left input i.
using ShareVector = std::vector<std::vector<EcssShare>>;

void write_multisig(Bytes& out, const MultiSignature& s);
MultiSignature read_multisig(crypto::Reader& in);
void write_share_vector(Bytes& out, const ShareVector& v);
ShareVector read_share_vector(crypto::Reader& in);

// Step 2 of the static protocol.
struct BridgeMessage {
  std::uint64_t c1 = 0;
  MultiSignature sigma1;
  std::uint64_t c2 = 0;
  MultiSignature sigma2;
  std::optional<ShareVector> shares;
};
Bytes encode(const BridgeMessage& m);
BridgeMessage decode_bridge(const Bytes& b);

// Step 2 of the adaptive protocol.
struct IndexBridgeMessage {
  MultiSignature sigma_own;      // on the sender's index
  MultiSignature sigma_partner;  // on the receiver's index
  ShareVector shares;
};
Bytes encode(const IndexBridgeMessage& m);
IndexBridgeMessage decode_index_bridge(const Bytes& b);

// Functionality inputs. `setup` is the party's serialised setup string.
struct ElectShareInput {
  Bytes x;
  Bytes setup;
};
Bytes encode(const ElectShareInput& in);
ElectShareInput decode_elect_share_input(const Bytes& b);

// Static: c, sigma on c, shares at the party's position in c.
// Adaptive: sigma on the party's own index, shares (c unused).
struct ReconInput {
  Bytes x;
  bool has_z = false;
  std::uint64_t c = 0;
  MultiSignature sigma;
  ShareVector shares;
  Bytes setup;
};
Bytes encode(const ReconInput& in);
ReconInput decode_recon_input(const Bytes& b);

struct OutDistInput {
  std::optional<Bytes> candidate;
  MultiSignature sigma_own;  // adaptive only
  Bytes setup;               // adaptive only
};
Bytes encode(const OutDistInput& in);
OutDistInput decode_out_dist_input(const Bytes& b);

// Elect-share output to one left party.
struct ElectShareOutput {
  std::uint64_t c1 = 0;  // static only
  bool member = false;
  int position = 0;
  std::uint64_t c2 = 0;  // static only
  int partner = 0;       // adaptive only: right party index m + i_(2,j)
  MultiSignature sigma1;
  MultiSignature sigma2;
  ShareVector shares;
};
Bytes encode(const ElectShareOutput& out);
ElectShareOutput decode_elect_share_output(const Bytes& b);

inline const std::string kElectShare = "elect-share";
inline const std::string kReconCompute = "recon-compute";
inline const std::string kOutDist = "out-dist";

}  // namespace ne

}  // namespace commlab::protocols
