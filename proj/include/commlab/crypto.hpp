#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "commlab/coins.hpp"

namespace commlab::crypto {

using Elem = std::uint64_t;
using Bytes = std::vector<std::uint8_t>;

inline constexpr Elem kMersenne61 = (Elem{1} << 61) - 1;

struct InvalidThreshold : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ReconstructionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct KeyExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_prime(std::uint64_t x);

class PrimeField {
 public:
  explicit PrimeField(Elem p = kMersenne61);

  Elem p() const { return p_; }
  Elem reduce(std::uint64_t x) const { return x % p_; }
  Elem add(Elem a, Elem b) const {
    Elem s = a + b;  // p < 2^62, no overflow
    return s >= p_ ? s - p_ : s;
  }
  Elem sub(Elem a, Elem b) const { return a >= b ? a - b : a + p_ - b; }
  Elem neg(Elem a) const { return a == 0 ? 0 : p_ - a; }
  Elem mul(Elem a, Elem b) const {
    return static_cast<Elem>(static_cast<unsigned __int128>(a) * b % p_);
  }
  Elem pow(Elem a, std::uint64_t e) const;
  Elem inv(Elem a) const;  // throws on zero

  // Evaluates sum_k coeffs[k] x^k.
  Elem eval(const std::vector<Elem>& coeffs, Elem x) const;
  // Value at 0 of the interpolating polynomial through (xs[i], ys[i]).
  Elem interpolate_at_zero(const std::vector<Elem>& xs, const std::vector<Elem>& ys) const;

  friend bool operator==(const PrimeField&, const PrimeField&) = default;

 private:
  Elem p_;
};

// Source of field randomness. Implementations must return values in [0, bound).
class Randomness {
 public:
  virtual ~Randomness() = default;
  virtual Elem uniform(Elem bound) = 0;
  Elem uniform_nonzero(Elem p) { return 1 + uniform(p - 1); }
};

class StreamRandomness : public Randomness {
 public:
  explicit StreamRandomness(CoinStream& coins) : coins_(coins) {}
  Elem uniform(Elem bound) override { return coins_.below(bound); }

 private:
  CoinStream& coins_;
};

// Replays a fixed tape; each draw is tape[i] mod bound. Used for exhaustive
// enumeration of coin outcomes.
class TapeRandomness : public Randomness {
 public:
  explicit TapeRandomness(std::vector<Elem> tape) : tape_(std::move(tape)) {}
  Elem uniform(Elem bound) override;
  std::size_t consumed() const { return pos_; }

 private:
  std::vector<Elem> tape_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Error-correcting secret sharing: Shamir plus pairwise one-time MACs.

struct MacKey {
  Elem a = 0;  // nonzero in honestly generated keys
  Elem b = 0;
  friend bool operator==(const MacKey&, const MacKey&) = default;
};

struct EcssShare {
  int index = 0;            // j, evaluated at x = j + 1
  Elem value = 0;           // s_j
  std::vector<Elem> tags;   // tags[k] = a_{k,j} s_j + b_{k,j}; tags[j] unused
  std::vector<MacKey> keys; // keys[k] = (a_{j,k}, b_{j,k}) checks share k; keys[j] unused
  friend bool operator==(const EcssShare&, const EcssShare&) = default;
};

// Coins are drawn in this order: the t Shamir coefficients r_1..r_t, then for
// each holder k = 0..n-1 and each j != k the pair a_{k,j} (nonzero), b_{k,j}.
std::vector<EcssShare> ecss_share(const PrimeField& f, Elem m, int t, int n, Randomness& rnd);

struct EcssReconstruction {
  Elem value = 0;
  std::vector<int> accepted;  // indices whose tags passed the n - t rule
};

// shares[j] is the share submitted for index j, or nullopt when missing.
// Share j is accepted when at least n - t tags verify, counting its holder.
EcssReconstruction ecss_recon_detailed(const PrimeField& f,
                                       const std::vector<std::optional<EcssShare>>& shares, int t);
Elem ecss_recon(const PrimeField& f, const std::vector<std::optional<EcssShare>>& shares, int t);
Elem ecss_recon(const PrimeField& f, const std::vector<EcssShare>& shares, int t);

// ---------------------------------------------------------------------------
// Information-theoretic signatures.
// f(y_1..y_{n-1}, x) = sum_k a_{0,k} x^k + sum_{j>=1} sum_k a_{j,k} y_j x^k,
// k = 0..ell_s. A signature on m is g(y) = f(y, m), stored as its n
// coefficients (constant term first).

struct ItSignature {
  std::vector<Elem> coeffs;
  friend bool operator==(const ItSignature&, const ItSignature&) = default;
};

class ItSigningKey {
 public:
  ItSigningKey() = default;
  ItSigningKey(PrimeField f, int ell_s, std::vector<std::vector<Elem>> a);

  ItSignature sign(Elem m);  // throws KeyExhausted after ell_s uses

  int ell_s() const { return ell_s_; }
  int uses() const { return uses_; }
  int verifiers() const { return static_cast<int>(a_.size()); }
  const PrimeField& field() const { return field_; }
  const std::vector<std::vector<Elem>>& coefficients() const { return a_; }

 private:
  friend struct KeyCodec;
  PrimeField field_;
  int ell_s_ = 0;
  int uses_ = 0;
  std::vector<std::vector<Elem>> a_;  // a_[j][k]
};

class ItVerificationKey {
 public:
  ItVerificationKey() = default;
  ItVerificationKey(PrimeField f, int ell_v, std::vector<Elem> v, std::vector<Elem> fv);

  bool verify(Elem m, const ItSignature& g);  // throws KeyExhausted after ell_v uses

  int ell_v() const { return ell_v_; }
  int uses() const { return uses_; }
  const std::vector<Elem>& point() const { return v_; }
  const std::vector<Elem>& restricted() const { return fv_; }

 private:
  friend struct KeyCodec;
  PrimeField field_;
  int ell_v_ = 0;
  int uses_ = 0;
  std::vector<Elem> v_;   // v_i in F^{n-1}
  std::vector<Elem> fv_;  // coefficients of f_{v_i}(x)
};

inline constexpr int kUnlimited = 1 << 30;

struct ItKeyMaterial {
  ItSigningKey sk;
  std::vector<ItVerificationKey> vks;  // one private key per verifier
};

ItKeyMaterial itsig_gen(const PrimeField& f, int n, int ell_s, int ell_v, Randomness& rnd);
ItSignature itsig_sign(Elem m, ItSigningKey& sk);
bool itsig_verify(Elem m, const ItSignature& g, ItVerificationKey& vk);

using MultiSignature = std::vector<ItSignature>;  // component i from signer i

MultiSignature multi_sign(Elem m, const std::vector<ItSigningKey*>& keys);
// keys[i] checks component i; accepts iff at least keys.size() - t pass.
bool multi_verify(Elem m, const MultiSignature& sigma, const std::vector<ItVerificationKey*>& keys,
                  int t);
// keys[i] lists verifier keys for signer i; component i passes iff at least
// keys[i].size() - t of them accept, and sigma passes iff at least
// keys.size() - t components pass.
bool multi_verify_nested(Elem m, const MultiSignature& sigma,
                         const std::vector<std::vector<ItVerificationKey*>>& keys, int t);

// ---------------------------------------------------------------------------
// Committee election and setup.

struct Committee {
  std::vector<int> members;  // sorted
  int bound = 0;
  friend bool operator==(const Committee&, const Committee&) = default;
};

int bin_count(int n, int n_prime);
// Out-of-range choices fall into bin 0.
Committee lightest_bin_elect(int n, int n_prime, const std::vector<int>& choices);

struct SetupString {
  int party = 0;
  ItSigningKey sk;
  std::vector<ItVerificationKey> vks;  // vks[j]: this party's key for signer j
};

std::vector<SetupString> setup_it_pki(const PrimeField& f, int n, int ell_s, int ell_v,
                                      Randomness& rnd);
inline constexpr int kPkiSigningBound = 16;
std::vector<SetupString> setup_pki(const PrimeField& f, int n, Randomness& rnd);

// ---------------------------------------------------------------------------
// Serialisation: little-endian fixed-width integers.

void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);

class Reader {
 public:
  explicit Reader(const Bytes& in) : in_(in) {}
  std::uint32_t u32();
  std::uint64_t u64();
  std::uint8_t u8();
  Bytes blob();  // u32 length prefix
  bool done() const { return pos_ == in_.size(); }

 private:
  const Bytes& in_;
  std::size_t pos_ = 0;
};

void put_elem(Bytes& out, Elem e);
void put_blob(Bytes& out, const Bytes& b);
Bytes serialize_share(const EcssShare& s);
EcssShare deserialize_share(const Bytes& in);
void write_share(Bytes& out, const EcssShare& s);
EcssShare read_share(Reader& in);

void write_signature(Bytes& out, const ItSignature& s);
ItSignature read_signature(Reader& in);

inline constexpr std::uint32_t kKeyBlobMagic = 0x4d4b4c43;  // "CLKM"
inline constexpr std::uint32_t kKeyBlobVersion = 1;
Bytes serialize_setup(const SetupString& s);
SetupString deserialize_setup(const Bytes& in);

}  // namespace commlab::crypto
