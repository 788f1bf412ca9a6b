// Independent brute-force references used by the tests. Deliberately naive:
// nothing here shares code with the library's search paths.
#pragma once

#include <algorithm>
#include <random>
#include <utility>
#include <vector>

#include "commlab/graphkit.hpp"

namespace oracle {

using commlab::graphkit::CommGraph;
using commlab::graphkit::Cut;
using commlab::graphkit::VertexSet;

inline long long crossing(const CommGraph& g, const std::vector<char>& in) {
  long long w = 0;
  for (const auto& [u, v] : g.edges()) w += in[u] != in[v];
  return w;
}

// All 2^(n-1) - 1 bipartitions, side containing vertex 0, canonical order.
inline std::vector<Cut> all_cuts(const CommGraph& g) {
  const int n = g.n();
  std::vector<Cut> cuts;
  if (n < 2) return cuts;
  for (unsigned long long rest = 0; rest + 1 < (1ULL << (n - 1)); ++rest) {
    std::vector<char> in(n, 0);
    in[0] = 1;
    for (int v = 1; v < n; ++v) in[v] = (rest >> (v - 1)) & 1;
    Cut c;
    for (int v = 0; v < n; ++v) {
      if (in[v]) c.side_s.push_back(v);
    }
    c.weight = crossing(g, in);
    cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end(), [](const Cut& a, const Cut& b) {
    return a.weight != b.weight ? a.weight < b.weight : a.side_s < b.side_s;
  });
  return cuts;
}

// min over nonempty S, |S| <= n/2, of |edges(S)| / |S|, as (num, den).
inline std::pair<long long, long long> expansion(const CommGraph& g) {
  const int n = g.n();
  std::pair<long long, long long> best{-1, 1};
  for (unsigned long long s = 1; s < (1ULL << n); ++s) {
    std::vector<char> in(n, 0);
    int size = 0;
    for (int v = 0; v < n; ++v) {
      in[v] = (s >> v) & 1;
      size += in[v];
    }
    if (2 * size > n) continue;
    long long w = crossing(g, in);
    if (best.first < 0 || w * best.second < best.first * size) best = {w, size};
  }
  return best;
}

inline CommGraph random_graph(int n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  CommGraph g(n);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (coin(rng)) g.add_edge(u, v);
    }
  }
  return g;
}

inline CommGraph clique(int n) {
  CommGraph g(n);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) g.add_edge(u, v);
  }
  return g;
}

struct Islands {
  CommGraph graph;
  std::vector<VertexSet> islands;
};

// Cliques on consecutive blocks; between each pair of islands, `bridges`
// random edges (distinct), optionally with vertices relabelled at random.
inline Islands island_graph(const std::vector<int>& sizes, int bridges, std::mt19937_64& rng,
                            bool shuffle = true) {
  int n = 0;
  for (int s : sizes) n += s;
  std::vector<int> label(n);
  for (int v = 0; v < n; ++v) label[v] = v;
  if (shuffle) std::shuffle(label.begin(), label.end(), rng);
  Islands out{CommGraph(n), {}};
  std::vector<VertexSet> blocks;
  int start = 0;
  for (int s : sizes) {
    VertexSet b;
    for (int k = 0; k < s; ++k) b.push_back(start + k);
    start += s;
    blocks.push_back(b);
  }
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      for (std::size_t j = i + 1; j < b.size(); ++j) out.graph.add_edge(label[b[i]], label[b[j]]);
    }
  }
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    for (std::size_t b = a + 1; b < blocks.size(); ++b) {
      int placed = 0;
      while (placed < bridges) {
        std::uniform_int_distribution<std::size_t> pa(0, blocks[a].size() - 1);
        std::uniform_int_distribution<std::size_t> pb(0, blocks[b].size() - 1);
        if (out.graph.add_edge(label[blocks[a][pa(rng)]], label[blocks[b][pb(rng)]])) ++placed;
      }
    }
  }
  for (const auto& b : blocks) {
    VertexSet s;
    for (int v : b) s.push_back(label[v]);
    std::sort(s.begin(), s.end());
    out.islands.push_back(s);
  }
  std::sort(out.islands.begin(), out.islands.end());
  return out;
}

}  // namespace oracle
