#include <algorithm>
#include <bit>
#include <deque>
#include <map>
#include <queue>

#include "commlab/graphkit.hpp"

namespace commlab::graphkit {

namespace {

// Unit-capacity undirected max-flow with many sources and many sinks.
class FlowNetwork {
 public:
  explicit FlowNetwork(const CommGraph& g) : n_(g.n()), arcs_(g.n()) {
    int id = 0;
    for (const auto& [u, v] : g.edges()) {
      arcs_[u].push_back({v, id, +1});
      arcs_[v].push_back({u, id, -1});
      ++id;
    }
    flow_.assign(id, 0);
    parent_arc_.assign(n_, -1);
    parent_.assign(n_, -1);
    seen_.assign(n_, 0);
  }

  // role[v]: +1 source, -1 sink, 0 free. On return, in_s marks the
  // source-reachable residual set (the minimal minimum cut side).
  std::int64_t min_cut(const std::vector<signed char>& role, std::vector<char>& in_s) {
    std::fill(flow_.begin(), flow_.end(), 0);
    std::int64_t value = 0;
    while (true) {
      int sink = bfs(role);
      if (sink < 0) break;
      for (int v = sink; role[v] != 1;) {
        const Arc& a = arcs_[parent_[v]][parent_arc_[v]];
        flow_[a.edge] += a.sign;
        v = parent_[v];
      }
      ++value;
    }
    in_s.assign(n_, 0);
    for (int v = 0; v < n_; ++v) in_s[v] = seen_[v];
    return value;
  }

 private:
  struct Arc {
    int to;
    int edge;
    int sign;  // +1 when the arc runs in the edge's stored direction
  };

  int bfs(const std::vector<signed char>& role) {
    std::fill(seen_.begin(), seen_.end(), 0);
    queue_.clear();
    for (int v = 0; v < n_; ++v) {
      if (role[v] == 1) {
        seen_[v] = 1;
        queue_.push_back(v);
      }
    }
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      int x = queue_[head];
      for (std::size_t k = 0; k < arcs_[x].size(); ++k) {
        const Arc& a = arcs_[x][k];
        if (seen_[a.to] || 1 - a.sign * flow_[a.edge] <= 0) continue;
        seen_[a.to] = 1;
        parent_[a.to] = x;
        parent_arc_[a.to] = static_cast<int>(k);
        if (role[a.to] == -1) return a.to;
        queue_.push_back(a.to);
      }
    }
    return -1;
  }

  int n_;
  std::vector<std::vector<Arc>> arcs_;
  std::vector<int> flow_;
  std::vector<int> parent_arc_;
  std::vector<int> parent_;
  std::vector<char> seen_;
  std::vector<int> queue_;
};

// Lawler / Vazirani-Yannakakis partition scheme over prefix-fixed subproblems.
// Yields cuts in non-decreasing weight; ties come out in discovery order.
class VyEnumerator {
 public:
  explicit VyEnumerator(const CommGraph& g) : g_(g), n_(g.n()), net_(g) {
    if (n_ < 2) return;
    std::vector<char> prefix{1};
    solve(prefix);
  }

  bool empty() const { return heap_.empty(); }
  std::int64_t peek_weight() const { return heap_.top().weight; }

  std::optional<Cut> next() {
    if (heap_.empty()) return std::nullopt;
    Node node = heap_.top();
    heap_.pop();
    for (int i = node.k; i < n_; ++i) {
      std::vector<char> prefix(node.side.begin(), node.side.begin() + i + 1);
      prefix[i] = !prefix[i];
      solve(prefix);
    }
    Cut cut;
    cut.weight = node.weight;
    for (int v = 0; v < n_; ++v) {
      if (node.side[v]) cut.side_s.push_back(v);
    }
    return cut;
  }

 private:
  struct Node {
    std::int64_t weight;
    std::uint64_t order;
    int k;
    std::vector<char> side;
  };
  struct Later {
    bool operator()(const Node& a, const Node& b) const {
      if (a.weight != b.weight) return a.weight > b.weight;
      return a.order > b.order;
    }
  };

  void push(std::int64_t weight, int k, std::vector<char> side) {
    heap_.push(Node{weight, counter_++, k, std::move(side)});
  }

  // Minimum cut among the cuts agreeing with `prefix` on its vertices.
  void solve(const std::vector<char>& prefix) {
    const int k = static_cast<int>(prefix.size());
    bool has_sink = std::find(prefix.begin(), prefix.end(), 0) != prefix.end();
    if (k == n_) {
      if (!has_sink) return;
      std::int64_t w = 0;
      for (int v = 0; v < n_; ++v) {
        if (!prefix[v]) continue;
        for (Vertex u : g_.neighbors(v)) w += !prefix[u];
      }
      push(w, k, prefix);
      return;
    }
    role_.assign(n_, 0);
    for (int v = 0; v < k; ++v) role_[v] = prefix[v] ? 1 : -1;
    if (has_sink) {
      std::int64_t w = net_.min_cut(role_, side_);
      push(w, k, side_);
      return;
    }
    std::int64_t best = -1;
    std::vector<char> best_side;
    for (int v = k; v < n_; ++v) {
      role_[v] = -1;
      std::int64_t w = net_.min_cut(role_, side_);
      role_[v] = 0;
      if (best < 0 || w < best) {
        best = w;
        best_side = side_;
      }
    }
    push(best, k, std::move(best_side));
  }

  const CommGraph& g_;
  int n_;
  FlowNetwork net_;
  std::priority_queue<Node, std::vector<Node>, Later> heap_;
  std::uint64_t counter_ = 0;
  std::vector<signed char> role_;
  std::vector<char> side_;
};

constexpr int kMaskLimit = 30;

std::vector<std::uint64_t> adjacency_masks(const CommGraph& g) {
  std::vector<std::uint64_t> adj(g.n(), 0);
  for (const auto& [u, v] : g.edges()) {
    adj[u] |= std::uint64_t{1} << v;
    adj[v] |= std::uint64_t{1} << u;
  }
  return adj;
}

std::int64_t mask_weight(const std::vector<std::uint64_t>& adj, std::uint64_t s) {
  std::int64_t w = 0;
  for (std::uint64_t rest = s; rest; rest &= rest - 1) {
    int v = std::countr_zero(rest);
    w += std::popcount(adj[v] & ~s);
  }
  return w;
}

ExpansionRatio ratio_for(std::int64_t weight, int side, int n) {
  return ExpansionRatio::make(weight, std::min(side, n - side));
}

}  // namespace

struct CutEnumerator::Impl {
  explicit Impl(const CommGraph& g) : graph(g), vy(graph) {}
  CommGraph graph;  // owned copy: the stream may outlive the caller's graph
  VyEnumerator vy;
  std::vector<Cut> buffer;
  std::size_t pos = 0;
};

CutEnumerator::CutEnumerator(const CommGraph& g) : impl_(std::make_unique<Impl>(g)) {}
CutEnumerator::~CutEnumerator() = default;
CutEnumerator::CutEnumerator(CutEnumerator&&) noexcept = default;
CutEnumerator& CutEnumerator::operator=(CutEnumerator&&) noexcept = default;

std::optional<Cut> CutEnumerator::next() {
  Impl& s = *impl_;
  if (s.pos < s.buffer.size()) return s.buffer[s.pos++];
  s.buffer.clear();
  s.pos = 0;
  auto first = s.vy.next();
  if (!first) return std::nullopt;
  s.buffer.push_back(*first);
  while (!s.vy.empty() && s.vy.peek_weight() == first->weight) s.buffer.push_back(*s.vy.next());
  std::sort(s.buffer.begin(), s.buffer.end(), canonical_less);
  return s.buffer[s.pos++];
}

std::vector<Cut> enumerate_cuts(const CommGraph& g, std::size_t limit) {
  std::vector<Cut> out;
  CutEnumerator e(g);
  while (out.size() < limit) {
    auto c = e.next();
    if (!c) break;
    out.push_back(std::move(*c));
  }
  return out;
}

std::vector<Cut> find_alpha_cuts(const CommGraph& g, std::int64_t alpha) {
  if (alpha < 0) throw std::invalid_argument("find_alpha_cuts: alpha must be non-negative");
  std::vector<Cut> out;
  CutEnumerator e(g);
  while (auto c = e.next()) {
    if (c->weight > alpha) break;
    out.push_back(std::move(*c));
  }
  return out;
}

ExpansionResult edge_expansion_detailed(const CommGraph& g, const ExpansionOptions& opts) {
  const int n = g.n();
  if (n < 2) throw std::invalid_argument("edge_expansion: need at least two vertices");
  if (n <= std::min(opts.exhaustive_cap, kMaskLimit)) {
    auto adj = adjacency_masks(g);
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    std::optional<ExpansionRatio> best;
    for (std::uint64_t s = 1; s < full; s += 2) {
      auto r = ratio_for(mask_weight(adj, s), std::popcount(s), n);
      if (!best || r < *best) best = r;
    }
    return {*best, true};
  }
  VyEnumerator vy(g);
  std::optional<ExpansionRatio> best;
  const std::int64_t half = n / 2;
  std::size_t seen = 0;
  while (!vy.empty()) {
    std::int64_t w = vy.peek_weight();
    // Every remaining cut has ratio >= w / floor(n/2).
    if (best && !(ExpansionRatio::make(w, half) < *best)) return {*best, true};
    if (seen++ >= opts.max_cuts) return {*best, false};
    auto cut = vy.next();
    auto r = ratio_for(cut->weight, static_cast<int>(cut->side_s.size()), n);
    if (!best || r < *best) best = r;
  }
  return {*best, true};
}

ExpansionRatio edge_expansion(const CommGraph& g, const ExpansionOptions& opts) {
  return edge_expansion_detailed(g, opts).ratio;
}

Partition alpha_d_partition(const CommGraph& g, std::int64_t alpha, int c) {
  const int n = g.n();
  if (c < 2) throw std::invalid_argument("alpha_d_partition: c must be at least 2");
  if (alpha < 0) throw std::invalid_argument("alpha_d_partition: alpha must be non-negative");
  for (int v = 0; v < n; ++v) {
    // deg(v) >= n/c - 1, kept in integers.
    if (static_cast<std::int64_t>(g.degree(v)) * c < static_cast<std::int64_t>(n) - c) {
      throw PreconditionFailure("alpha_d_partition: vertex " + std::to_string(v) + " has degree " +
                                    std::to_string(g.degree(v)) + " < n/c - 1",
                                v);
    }
  }
  Partition p;
  p.alpha = alpha;
  p.d = size_bound(n, c);
  auto cuts = find_alpha_cuts(g, alpha);
  if (cuts.empty()) {
    VertexSet all(n);
    for (int v = 0; v < n; ++v) all[v] = v;
    p.parts.push_back(std::move(all));
  } else {
    std::vector<std::vector<char>> in(cuts.size(), std::vector<char>(n, 0));
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      for (Vertex v : cuts[i].side_s) in[i][v] = 1;
    }
    std::map<std::vector<char>, VertexSet> atoms;
    for (int v = 0; v < n; ++v) {
      std::vector<char> sig(cuts.size());
      for (std::size_t i = 0; i < cuts.size(); ++i) sig[i] = in[i][v];
      atoms[sig].push_back(v);
    }
    for (auto& [sig, part] : atoms) p.parts.push_back(std::move(part));
    std::sort(p.parts.begin(), p.parts.end());
  }
  if (static_cast<int>(p.parts.size()) > c) {
    p.diagnostics.push_back("partition has " + std::to_string(p.parts.size()) +
                            " parts, more than c = " + std::to_string(c));
  }
  for (const auto& part : p.parts) {
    if (static_cast<int>(part.size()) < p.d) {
      p.diagnostics.push_back("part starting at vertex " + std::to_string(part.front()) +
                              " has size " + std::to_string(part.size()) + " < " +
                              std::to_string(p.d));
    }
  }
  return p;
}

bool verify_partition(const CommGraph& g, const Partition& p, int exhaustive_cap) {
  const int n = g.n();
  std::vector<int> owner(n, -1);
  for (std::size_t i = 0; i < p.parts.size(); ++i) {
    if (p.parts[i].empty()) return false;
    for (Vertex v : p.parts[i]) {
      if (v < 0 || v >= n || owner[v] != -1) return false;
      owner[v] = static_cast<int>(i);
    }
  }
  if (std::find(owner.begin(), owner.end(), -1) != owner.end()) return false;

  for (const auto& part : p.parts) {
    if (static_cast<int>(part.size()) < p.d) return false;
  }
  for (std::size_t i = 0; i < p.parts.size(); ++i) {
    for (std::size_t j = i + 1; j < p.parts.size(); ++j) {
      if (edges_between(g, p.parts[i], p.parts[j]) > p.alpha) return false;
    }
  }

  if (n < 2) return true;
  if (n <= std::min(exhaustive_cap, kMaskLimit)) {
    auto adj = adjacency_masks(g);
    std::vector<std::uint64_t> masks;
    for (const auto& part : p.parts) {
      std::uint64_t m = 0;
      for (Vertex v : part) m |= std::uint64_t{1} << v;
      masks.push_back(m);
    }
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    for (std::uint64_t s = 1; s < full; s += 2) {
      if (mask_weight(adj, s) > p.alpha) continue;
      for (std::uint64_t m : masks) {
        if ((m & s) != 0 && (m & s) != m) return false;
      }
    }
    return true;
  }
  for (const auto& cut : find_alpha_cuts(g, p.alpha)) {
    std::vector<char> in(n, 0);
    for (Vertex v : cut.side_s) in[v] = 1;
    for (const auto& part : p.parts) {
      for (Vertex v : part) {
        if (in[v] != in[part.front()]) return false;
      }
    }
  }
  return true;
}

}  // namespace commlab::graphkit
