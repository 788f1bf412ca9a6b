#include <algorithm>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "commlab/graphkit.hpp"

namespace commlab::graphkit {

std::string to_edge_list(const CommGraph& g) {
  std::ostringstream out;
  out << g.n() << ' ' << g.edge_count() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
  return out.str();
}

CommGraph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  long long n = -1, m = -1;
  if (!(in >> n >> m) || n < 0 || m < 0) {
    throw std::invalid_argument("edge list: expected 'n m' header");
  }
  CommGraph g(static_cast<int>(n));
  for (long long k = 0; k < m; ++k) {
    long long u, v;
    if (!(in >> u >> v)) {
      throw std::invalid_argument("edge list: expected " + std::to_string(m) + " edges, got " +
                                  std::to_string(k));
    }
    if (!g.add_edge(static_cast<int>(u), static_cast<int>(v))) {
      throw std::invalid_argument("edge list: duplicate edge " + std::to_string(u) + " " +
                                  std::to_string(v));
    }
  }
  std::string trailing;
  if (in >> trailing) throw std::invalid_argument("edge list: trailing data '" + trailing + "'");
  return g;
}

std::string to_dot(const CommGraph& g, const DotStyle& style) {
  std::vector<char> side(g.n(), 0);
  for (Vertex v : style.highlight_side) {
    if (v >= 0 && v < g.n()) side[v] = 1;
  }
  const bool highlight = !style.highlight_side.empty();
  std::ostringstream out;
  out << "graph " << style.name << " {\n";
  for (int v = 0; v < g.n(); ++v) {
    bool bad = v < static_cast<int>(style.corrupted.size()) && style.corrupted[v];
    out << "  " << v;
    if (bad) {
      out << " [shape=box, style=filled, fillcolor=gray70]";
    } else {
      out << " [shape=circle]";
    }
    out << ";\n";
  }
  for (const auto& [u, v] : g.edges()) {
    out << "  " << u << " -- " << v;
    if (highlight && side[u] != side[v]) out << " [color=red, penwidth=2]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

CommGraph parse_dot(const std::string& text) {
  static const std::regex edge_re(R"(^\s*(\d+)\s*--\s*(\d+))");
  static const std::regex node_re(R"(^\s*(\d+)\s*(\[|;))");
  std::vector<Edge> edges;
  int n = 0;
  std::istringstream in(text);
  std::string line;
  std::smatch m;
  while (std::getline(in, line)) {
    if (std::regex_search(line, m, edge_re)) {
      int u = std::stoi(m[1]), v = std::stoi(m[2]);
      edges.emplace_back(u, v);
      n = std::max({n, u + 1, v + 1});
    } else if (std::regex_search(line, m, node_re)) {
      n = std::max(n, std::stoi(m[1]) + 1);
    }
  }
  return CommGraph(n, edges);
}

std::string partition_to_json(const std::vector<VertexSet>& parts) {
  return nlohmann::json(parts).dump();
}

std::vector<VertexSet> partition_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  if (!j.is_array()) throw std::invalid_argument("partition json: expected an array");
  std::vector<VertexSet> parts;
  for (const auto& part : j) {
    VertexSet s = part.get<VertexSet>();
    std::sort(s.begin(), s.end());
    parts.push_back(std::move(s));
  }
  return parts;
}

}  // namespace commlab::graphkit
