#include <algorithm>

#include "commlab/crypto.hpp"

namespace commlab::crypto {

int bin_count(int n, int n_prime) {
  if (n < 1 || n_prime < 1) throw std::invalid_argument("bin_count: n and n' must be positive");
  return (n + n_prime - 1) / n_prime;
}

Committee lightest_bin_elect(int n, int n_prime, const std::vector<int>& choices) {
  const int bins = bin_count(n, n_prime);
  std::vector<std::vector<int>> occupants(bins);
  for (int i = 0; i < static_cast<int>(choices.size()) && i < n; ++i) {
    int b = choices[i];
    if (b < 0 || b >= bins) b = 0;
    occupants[b].push_back(i);
  }
  int best = 0;
  for (int b = 1; b < bins; ++b) {
    if (occupants[b].size() < occupants[best].size()) best = b;
  }
  Committee c;
  c.bound = n_prime;
  c.members = occupants[best];
  if (static_cast<int>(c.members.size()) > n_prime) c.members.resize(n_prime);
  return c;
}

std::vector<SetupString> setup_it_pki(const PrimeField& f, int n, int ell_s, int ell_v,
                                      Randomness& rnd) {
  std::vector<SetupString> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].party = i;
    out[i].vks.resize(n);
  }
  for (int signer = 0; signer < n; ++signer) {
    ItKeyMaterial km = itsig_gen(f, n, ell_s, ell_v, rnd);
    out[signer].sk = std::move(km.sk);
    for (int i = 0; i < n; ++i) out[i].vks[signer] = std::move(km.vks[i]);
  }
  return out;
}

std::vector<SetupString> setup_pki(const PrimeField& f, int n, Randomness& rnd) {
  return setup_it_pki(f, n, kPkiSigningBound, kUnlimited, rnd);
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_elem(Bytes& out, Elem e) { put_u64(out, e); }

void put_blob(Bytes& out, const Bytes& b) {
  put_u32(out, static_cast<std::uint32_t>(b.size()));
  out.insert(out.end(), b.begin(), b.end());
}

std::uint8_t Reader::u8() {
  if (pos_ + 1 > in_.size()) throw FormatError("truncated input");
  return in_[pos_++];
}

Bytes Reader::blob() {
  std::uint32_t len = u32();
  if (len > in_.size() - pos_) throw FormatError("blob length exceeds input");
  Bytes b(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
          in_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
  pos_ += len;
  return b;
}

std::uint32_t Reader::u32() {
  if (pos_ + 4 > in_.size()) throw FormatError("truncated input");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
  return v;
}

std::uint64_t Reader::u64() {
  if (pos_ + 8 > in_.size()) throw FormatError("truncated input");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
  return v;
}

namespace {

constexpr std::uint32_t kMaxLength = 1u << 20;

std::uint32_t checked_length(Reader& in) {
  std::uint32_t len = in.u32();
  if (len > kMaxLength) throw FormatError("length field too large");
  return len;
}

void write_elems(Bytes& out, const std::vector<Elem>& v) {
  put_u32(out, static_cast<std::uint32_t>(v.size()));
  for (Elem e : v) put_elem(out, e);
}

std::vector<Elem> read_elems(Reader& in) {
  std::vector<Elem> v(checked_length(in));
  for (auto& e : v) e = in.u64();
  return v;
}

}  // namespace

void write_share(Bytes& out, const EcssShare& s) {
  put_u32(out, static_cast<std::uint32_t>(s.index));
  put_elem(out, s.value);
  write_elems(out, s.tags);
  put_u32(out, static_cast<std::uint32_t>(s.keys.size()));
  for (const auto& k : s.keys) {
    put_elem(out, k.a);
    put_elem(out, k.b);
  }
}

EcssShare read_share(Reader& in) {
  EcssShare s;
  s.index = static_cast<int>(in.u32());
  s.value = in.u64();
  s.tags = read_elems(in);
  s.keys.resize(checked_length(in));
  for (auto& k : s.keys) {
    k.a = in.u64();
    k.b = in.u64();
  }
  return s;
}

Bytes serialize_share(const EcssShare& s) {
  Bytes out;
  write_share(out, s);
  return out;
}

EcssShare deserialize_share(const Bytes& in) {
  Reader r(in);
  EcssShare s = read_share(r);
  if (!r.done()) throw FormatError("trailing bytes after share");
  return s;
}

void write_signature(Bytes& out, const ItSignature& s) { write_elems(out, s.coeffs); }

ItSignature read_signature(Reader& in) { return ItSignature{read_elems(in)}; }

struct KeyCodec {
  static void write(Bytes& out, const ItSigningKey& k) {
    put_u64(out, k.field_.p());
    put_u32(out, static_cast<std::uint32_t>(k.ell_s_));
    put_u32(out, static_cast<std::uint32_t>(k.uses_));
    put_u32(out, static_cast<std::uint32_t>(k.a_.size()));
    for (const auto& row : k.a_) write_elems(out, row);
  }
  static ItSigningKey read_sk(Reader& in) {
    ItSigningKey k;
    k.field_ = PrimeField(in.u64());
    k.ell_s_ = static_cast<int>(in.u32());
    k.uses_ = static_cast<int>(in.u32());
    k.a_.resize(checked_length(in));
    for (auto& row : k.a_) row = read_elems(in);
    return k;
  }
  static void write(Bytes& out, const ItVerificationKey& k) {
    put_u64(out, k.field_.p());
    put_u32(out, static_cast<std::uint32_t>(k.ell_v_));
    put_u32(out, static_cast<std::uint32_t>(k.uses_));
    write_elems(out, k.v_);
    write_elems(out, k.fv_);
  }
  static ItVerificationKey read_vk(Reader& in) {
    ItVerificationKey k;
    k.field_ = PrimeField(in.u64());
    k.ell_v_ = static_cast<int>(in.u32());
    k.uses_ = static_cast<int>(in.u32());
    k.v_ = read_elems(in);
    k.fv_ = read_elems(in);
    return k;
  }
};

Bytes serialize_setup(const SetupString& s) {
  Bytes out;
  put_u32(out, kKeyBlobMagic);
  put_u32(out, kKeyBlobVersion);
  put_u32(out, static_cast<std::uint32_t>(s.party));
  KeyCodec::write(out, s.sk);
  put_u32(out, static_cast<std::uint32_t>(s.vks.size()));
  for (const auto& vk : s.vks) KeyCodec::write(out, vk);
  return out;
}

SetupString deserialize_setup(const Bytes& in) {
  Reader r(in);
  if (r.u32() != kKeyBlobMagic) throw FormatError("key blob: bad magic");
  std::uint32_t version = r.u32();
  if (version != kKeyBlobVersion) {
    throw FormatError("key blob: unsupported version " + std::to_string(version));
  }
  SetupString s;
  s.party = static_cast<int>(r.u32());
  s.sk = KeyCodec::read_sk(r);
  s.vks.resize(checked_length(r));
  for (auto& vk : s.vks) vk = KeyCodec::read_vk(r);
  if (!r.done()) throw FormatError("key blob: trailing bytes");
  return s;
}

}  // namespace commlab::crypto
