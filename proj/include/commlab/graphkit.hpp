#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace commlab::graphkit {

using Vertex = int;
using VertexSet = std::vector<Vertex>;  // sorted, duplicate-free
using Edge = std::pair<Vertex, Vertex>;  // first < second

inline constexpr int kDefaultExhaustiveCap = 20;

class PreconditionFailure : public std::runtime_error {
 public:
  PreconditionFailure(const std::string& what, Vertex vertex)
      : std::runtime_error(what), vertex_(vertex) {}
  Vertex vertex() const { return vertex_; }

 private:
  Vertex vertex_;
};

// Simple undirected graph on vertices 0..n-1.
class CommGraph {
 public:
  CommGraph() = default;
  explicit CommGraph(int n);
  CommGraph(int n, const std::vector<Edge>& edges);

  int n() const { return n_; }
  std::size_t edge_count() const { return edge_count_; }

  // Returns false if the edge was already present.
  bool add_edge(Vertex u, Vertex v);
  bool has_edge(Vertex u, Vertex v) const;
  int degree(Vertex v) const;
  const VertexSet& neighbors(Vertex v) const { return adj_[v]; }

  // Sorted (u < v) edge list.
  std::vector<Edge> edges() const;

  // Subgraph on all vertices except `v`, relabelled to 0..n-2 (order kept).
  CommGraph without_vertex(Vertex v) const;

  friend bool operator==(const CommGraph& a, const CommGraph& b) {
    return a.n_ == b.n_ && a.adj_ == b.adj_;
  }

 private:
  void check_vertex(Vertex v) const;

  int n_ = 0;
  std::size_t edge_count_ = 0;
  std::vector<VertexSet> adj_;
};

struct Cut {
  VertexSet side_s;  // side containing vertex 0
  std::int64_t weight = 0;

  friend bool operator==(const Cut&, const Cut&) = default;
};

// Canonical order: weight, then lexicographic side_s.
bool canonical_less(const Cut& a, const Cut& b);

struct Partition {
  std::vector<VertexSet> parts;
  std::int64_t alpha = 0;
  int d = 0;
  // Non-fatal notes (|Gamma| > c, undersized parts on small inputs).
  std::vector<std::string> diagnostics;
};

// Exact non-negative rational, kept in lowest terms.
struct ExpansionRatio {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;

  static ExpansionRatio make(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
  std::string str() const;

  friend bool operator==(const ExpansionRatio&, const ExpansionRatio&) = default;
  friend bool operator<(const ExpansionRatio& a, const ExpansionRatio& b);
  friend bool operator<=(const ExpansionRatio& a, const ExpansionRatio& b) { return !(b < a); }
};

struct ExpansionOptions {
  int exhaustive_cap = kDefaultExhaustiveCap;
  // Above the cap, at most this many enumerated cuts are examined; when the
  // limit is hit before the weight bound closes, the result is an upper bound.
  std::size_t max_cuts = 1u << 20;
};

struct ExpansionResult {
  ExpansionRatio ratio;
  bool exact = true;
};

std::int64_t edges_between(const CommGraph& g, const VertexSet& u1, const VertexSet& u2);
std::int64_t cut_weight(const CommGraph& g, const VertexSet& side);
int min_degree(const CommGraph& g);

ExpansionRatio edge_expansion(const CommGraph& g, const ExpansionOptions& opts = {});
ExpansionResult edge_expansion_detailed(const CommGraph& g, const ExpansionOptions& opts = {});

// Streams every cut exactly once in canonical order. Single consumer.
class CutEnumerator {
 public:
  explicit CutEnumerator(const CommGraph& g);
  ~CutEnumerator();
  CutEnumerator(CutEnumerator&&) noexcept;
  CutEnumerator& operator=(CutEnumerator&&) noexcept;

  std::optional<Cut> next();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Materialises up to `limit` cuts from the stream.
std::vector<Cut> enumerate_cuts(const CommGraph& g, std::size_t limit = SIZE_MAX);

std::vector<Cut> find_alpha_cuts(const CommGraph& g, std::int64_t alpha);

Partition alpha_d_partition(const CommGraph& g, std::int64_t alpha, int c);

bool verify_partition(const CommGraph& g, const Partition& p,
                      int exhaustive_cap = kDefaultExhaustiveCap);

// ceil(n / c): the integer form of the size bound n/c.
int size_bound(int n, int c);

// I/O
std::string to_edge_list(const CommGraph& g);
CommGraph parse_edge_list(const std::string& text);

struct DotStyle {
  std::vector<bool> corrupted;   // optional per-vertex flag
  VertexSet highlight_side;       // edges crossing this side are highlighted
  std::string name = "G";
};
std::string to_dot(const CommGraph& g, const DotStyle& style = {});
CommGraph parse_dot(const std::string& text);

std::string partition_to_json(const std::vector<VertexSet>& parts);
std::vector<VertexSet> partition_from_json(const std::string& text);

}  // namespace commlab::graphkit
