#include "commlab/protocols.hpp"

namespace commlab::protocols::ne {

using crypto::FormatError;
using crypto::Reader;
using crypto::put_blob;
using crypto::put_u32;
using crypto::put_u64;

namespace {
constexpr std::uint32_t kMaxItems = 4096;

std::uint32_t count(Reader& in) {
  std::uint32_t c = in.u32();
  if (c > kMaxItems) throw FormatError("item count too large");
  return c;
}

void finish(Reader& in) {
  if (!in.done()) throw FormatError("trailing bytes");
}
}  // namespace

std::uint64_t subset_mask(const std::vector<int>& s) {
  std::uint64_t mask = 0;
  for (int i : s) {
    if (i < 0 || i >= 63) throw std::out_of_range("subset element out of range");
    mask |= std::uint64_t{1} << i;
  }
  return mask;
}

std::vector<int> mask_subset(std::uint64_t mask) {
  std::vector<int> s;
  for (int i = 0; i < 64; ++i) {
    if (mask >> i & 1) s.push_back(i);
  }
  return s;
}

void write_multisig(Bytes& out, const MultiSignature& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  for (const auto& g : s) crypto::write_signature(out, g);
}

MultiSignature read_multisig(Reader& in) {
  MultiSignature s(count(in));
  for (auto& g : s) g = crypto::read_signature(in);
  return s;
}

void write_share_vector(Bytes& out, const ShareVector& v) {
  put_u32(out, static_cast<std::uint32_t>(v.size()));
  for (const auto& bits : v) {
    put_u32(out, static_cast<std::uint32_t>(bits.size()));
    for (const auto& s : bits) crypto::write_share(out, s);
  }
}

ShareVector read_share_vector(Reader& in) {
  ShareVector v(count(in));
  for (auto& bits : v) {
    bits.resize(count(in));
    for (auto& s : bits) s = crypto::read_share(in);
  }
  return v;
}

Bytes encode(const BridgeMessage& m) {
  Bytes out;
  put_u64(out, m.c1);
  write_multisig(out, m.sigma1);
  put_u64(out, m.c2);
  write_multisig(out, m.sigma2);
  out.push_back(m.shares ? 1 : 0);
  if (m.shares) write_share_vector(out, *m.shares);
  return out;
}

BridgeMessage decode_bridge(const Bytes& b) {
  Reader in(b);
  BridgeMessage m;
  m.c1 = in.u64();
  m.sigma1 = read_multisig(in);
  m.c2 = in.u64();
  m.sigma2 = read_multisig(in);
  if (in.u8()) m.shares = read_share_vector(in);
  finish(in);
  return m;
}

Bytes encode(const IndexBridgeMessage& m) {
  Bytes out;
  write_multisig(out, m.sigma_own);
  write_multisig(out, m.sigma_partner);
  write_share_vector(out, m.shares);
  return out;
}

IndexBridgeMessage decode_index_bridge(const Bytes& b) {
  Reader in(b);
  IndexBridgeMessage m;
  m.sigma_own = read_multisig(in);
  m.sigma_partner = read_multisig(in);
  m.shares = read_share_vector(in);
  finish(in);
  return m;
}

Bytes encode(const ElectShareInput& in) {
  Bytes out;
  put_blob(out, in.x);
  put_blob(out, in.setup);
  return out;
}

ElectShareInput decode_elect_share_input(const Bytes& b) {
  Reader in(b);
  ElectShareInput e;
  e.x = in.blob();
  e.setup = in.blob();
  finish(in);
  return e;
}

Bytes encode(const ReconInput& r) {
  Bytes out;
  put_blob(out, r.x);
  out.push_back(r.has_z ? 1 : 0);
  if (r.has_z) {
    put_u64(out, r.c);
    write_multisig(out, r.sigma);
    write_share_vector(out, r.shares);
  }
  put_blob(out, r.setup);
  return out;
}

ReconInput decode_recon_input(const Bytes& b) {
  Reader in(b);
  ReconInput r;
  r.x = in.blob();
  r.has_z = in.u8() != 0;
  if (r.has_z) {
    r.c = in.u64();
    r.sigma = read_multisig(in);
    r.shares = read_share_vector(in);
  }
  r.setup = in.blob();
  finish(in);
  return r;
}

Bytes encode(const OutDistInput& o) {
  Bytes out;
  out.push_back(o.candidate ? 1 : 0);
  if (o.candidate) put_blob(out, *o.candidate);
  write_multisig(out, o.sigma_own);
  put_blob(out, o.setup);
  return out;
}

OutDistInput decode_out_dist_input(const Bytes& b) {
  Reader in(b);
  OutDistInput o;
  if (in.u8()) o.candidate = in.blob();
  o.sigma_own = read_multisig(in);
  o.setup = in.blob();
  finish(in);
  return o;
}

Bytes encode(const ElectShareOutput& e) {
  Bytes out;
  put_u64(out, e.c1);
  out.push_back(e.member ? 1 : 0);
  if (e.member) {
    put_u32(out, static_cast<std::uint32_t>(e.position));
    put_u64(out, e.c2);
    put_u32(out, static_cast<std::uint32_t>(e.partner));
    write_multisig(out, e.sigma1);
    write_multisig(out, e.sigma2);
    write_share_vector(out, e.shares);
  }
  return out;
}

ElectShareOutput decode_elect_share_output(const Bytes& b) {
  Reader in(b);
  ElectShareOutput e;
  e.c1 = in.u64();
  e.member = in.u8() != 0;
  if (e.member) {
    e.position = static_cast<int>(in.u32());
    e.c2 = in.u64();
    e.partner = static_cast<int>(in.u32());
    e.sigma1 = read_multisig(in);
    e.sigma2 = read_multisig(in);
    e.shares = read_share_vector(in);
  }
  finish(in);
  return e;
}

}  // namespace commlab::protocols::ne
