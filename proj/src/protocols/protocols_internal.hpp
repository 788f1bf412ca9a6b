#pragma once

#include "commlab/protocols.hpp"

namespace commlab::protocols {

std::shared_ptr<netsim::Protocol> make_flooding(const ProtocolParams& p);
std::shared_ptr<netsim::Protocol> make_strawman(const ProtocolParams& p);
std::shared_ptr<netsim::Protocol> make_ne(const ProtocolParams& p, bool adaptive);

}  // namespace commlab::protocols
