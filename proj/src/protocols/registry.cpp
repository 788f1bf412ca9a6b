#include <stdexcept>

#include "protocols_internal.hpp"

namespace commlab::protocols {

std::vector<std::string> protocol_ids() { return {"pi_ne", "pi_a_ne", "flooding", "strawman"}; }

std::shared_ptr<netsim::Protocol> make_protocol(const std::string& id, const ProtocolParams& p) {
  if (p.kappa < 1) throw std::invalid_argument("kappa must be positive");
  if (id == "pi_ne") return make_ne(p, false);
  if (id == "pi_a_ne") return make_ne(p, true);
  if (id == "flooding") return make_flooding(p);
  if (id == "strawman") return make_strawman(p);
  throw std::invalid_argument("unknown protocol: " + id);
}

}  // namespace commlab::protocols
