#include <algorithm>
#include <numeric>
#include <sstream>

#include "commlab/graphkit.hpp"

namespace commlab::graphkit {

CommGraph::CommGraph(int n) : n_(n), adj_(static_cast<std::size_t>(std::max(n, 0))) {
  if (n < 0) throw std::invalid_argument("negative vertex count");
}

CommGraph::CommGraph(int n, const std::vector<Edge>& edges) : CommGraph(n) {
  for (const auto& [u, v] : edges) add_edge(u, v);
}

void CommGraph::check_vertex(Vertex v) const {
  if (v < 0 || v >= n_) {
    throw std::invalid_argument("vertex " + std::to_string(v) + " outside [0," +
                                std::to_string(n_) + ")");
  }
}

bool CommGraph::add_edge(Vertex u, Vertex v) {
  check_vertex(u);
  check_vertex(v);
  if (u == v) throw std::invalid_argument("self-loop at vertex " + std::to_string(u));
  auto& au = adj_[u];
  auto it = std::lower_bound(au.begin(), au.end(), v);
  if (it != au.end() && *it == v) return false;
  au.insert(it, v);
  auto& av = adj_[v];
  av.insert(std::lower_bound(av.begin(), av.end(), u), u);
  ++edge_count_;
  return true;
}

bool CommGraph::has_edge(Vertex u, Vertex v) const {
  if (u < 0 || v < 0 || u >= n_ || v >= n_) return false;
  return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
}

int CommGraph::degree(Vertex v) const {
  check_vertex(v);
  return static_cast<int>(adj_[v].size());
}

std::vector<Edge> CommGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (Vertex u = 0; u < n_; ++u) {
    for (Vertex v : adj_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

CommGraph CommGraph::without_vertex(Vertex v) const {
  check_vertex(v);
  CommGraph h(n_ - 1);
  auto relabel = [v](Vertex x) { return x < v ? x : x - 1; };
  for (const auto& [a, b] : edges()) {
    if (a != v && b != v) h.add_edge(relabel(a), relabel(b));
  }
  return h;
}

bool canonical_less(const Cut& a, const Cut& b) {
  if (a.weight != b.weight) return a.weight < b.weight;
  return a.side_s < b.side_s;
}

ExpansionRatio ExpansionRatio::make(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw std::invalid_argument("expansion denominator must be positive");
  if (num < 0) throw std::invalid_argument("expansion numerator must be non-negative");
  std::int64_t g = std::gcd(num, den);
  if (g == 0) g = 1;
  return ExpansionRatio{num / g, den / g};
}

std::string ExpansionRatio::str() const {
  if (denominator == 1) return std::to_string(numerator);
  return std::to_string(numerator) + "/" + std::to_string(denominator);
}

bool operator<(const ExpansionRatio& a, const ExpansionRatio& b) {
  return static_cast<__int128>(a.numerator) * b.denominator <
         static_cast<__int128>(b.numerator) * a.denominator;
}

namespace {

std::vector<char> membership(int n, const VertexSet& s, const char* what) {
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  for (Vertex v : s) {
    if (v < 0 || v >= n) throw std::invalid_argument(std::string(what) + ": vertex out of range");
    in[v] = 1;
  }
  return in;
}

}  // namespace

std::int64_t edges_between(const CommGraph& g, const VertexSet& u1, const VertexSet& u2) {
  auto in1 = membership(g.n(), u1, "edges_between");
  auto in2 = membership(g.n(), u2, "edges_between");
  for (int v = 0; v < g.n(); ++v) {
    if (in1[v] && in2[v]) throw std::invalid_argument("edges_between: sets overlap");
  }
  std::int64_t count = 0;
  for (int v = 0; v < g.n(); ++v) {
    if (!in1[v]) continue;
    for (Vertex w : g.neighbors(v)) count += in2[w];
  }
  return count;
}

std::int64_t cut_weight(const CommGraph& g, const VertexSet& side) {
  auto in = membership(g.n(), side, "cut_weight");
  std::int64_t count = 0;
  for (int v = 0; v < g.n(); ++v) {
    if (!in[v]) continue;
    for (Vertex w : g.neighbors(v)) count += !in[w];
  }
  return count;
}

int min_degree(const CommGraph& g) {
  if (g.n() < 1) throw std::invalid_argument("min_degree: empty graph");
  int best = g.n();
  for (int v = 0; v < g.n(); ++v) best = std::min(best, g.degree(v));
  return best;
}

int size_bound(int n, int c) {
  if (c <= 0) throw std::invalid_argument("size_bound: c must be positive");
  return (n + c - 1) / c;
}

}  // namespace commlab::graphkit
