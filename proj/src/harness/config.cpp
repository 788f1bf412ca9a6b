#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "commlab/harness.hpp"

namespace commlab::harness {

using nlohmann::json;

// ---------------------------------------------------------------------------
// TOML subset

namespace {

class TomlLine {
 public:
  TomlLine(const std::string& s, int line) : s_(s), line_(line) {}

  json value() {
    skip_ws();
    if (eof()) fail("missing value");
    const char c = s_[i_];
    if (c == '"') return string();
    if (c == '[') return array();
    if (s_.compare(i_, 4, "true") == 0) {
      i_ += 4;
      return true;
    }
    if (s_.compare(i_, 5, "false") == 0) {
      i_ += 5;
      return false;
    }
    if (c == '{') fail("inline tables are not supported");
    return number();
  }

  std::string key() {
    skip_ws();
    std::size_t b = i_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_' || s_[i_] == '-')) ++i_;
    if (b == i_) fail("expected a bare key");
    return s_.substr(b, i_ - b);
  }

  void expect(char c) {
    skip_ws();
    if (eof() || s_[i_] != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }

  void finish() {
    skip_ws();
    if (!eof() && s_[i_] != '#') fail("trailing characters");
  }

 private:
  bool eof() const { return i_ >= s_.size(); }
  void skip_ws() {
    while (!eof() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("toml line " + std::to_string(line_) + ": " + what);
  }

  json string() {
    ++i_;
    std::string out;
    while (!eof() && s_[i_] != '"') {
      if (s_[i_] == '\\') {
        ++i_;
        if (eof()) break;
        switch (s_[i_]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail("unsupported escape");
        }
      } else {
        out += s_[i_];
      }
      ++i_;
    }
    if (eof()) fail("unterminated string");
    ++i_;
    return out;
  }

  json array() {
    ++i_;
    json a = json::array();
    skip_ws();
    if (!eof() && s_[i_] == ']') {
      ++i_;
      return a;
    }
    for (;;) {
      a.push_back(value());
      skip_ws();
      if (eof()) fail("unterminated array");
      if (s_[i_] == ']') {
        ++i_;
        return a;
      }
      if (s_[i_] != ',') fail("expected ',' in array");
      ++i_;
      skip_ws();
      if (!eof() && s_[i_] == ']') {
        ++i_;
        return a;
      }
    }
  }

  json number() {
    std::size_t b = i_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.' || s_[i_] == '-' ||
                      s_[i_] == '+' || s_[i_] == '_')) {
      ++i_;
    }
    std::string tok = s_.substr(b, i_ - b);
    tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
    if (tok.empty()) fail("expected a value");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    try {
      std::size_t used = 0;
      if (is_float) {
        double d = std::stod(tok, &used);
        if (used == tok.size()) return d;
      } else if (tok[0] == '-') {
        long long v = std::stoll(tok, &used);
        if (used == tok.size()) return v;
      } else {
        unsigned long long v = std::stoull(tok, &used);
        if (used == tok.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("bad value '" + tok + "'");
  }

  const std::string& s_;
  std::size_t i_ = 0;
  int line_;
};

}  // namespace

json parse_toml_subset(const std::string& text) {
  json out = json::object();
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line[first] == '[') throw ConfigError("toml line " + std::to_string(no) + ": tables are not supported");
    TomlLine p(line, no);
    const std::string k = p.key();
    p.expect('=');
    json v = p.value();
    p.finish();
    if (out.contains(k)) throw ConfigError("toml line " + std::to_string(no) + ": duplicate key " + k);
    out[k] = std::move(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Expressions

namespace {

class Expr {
 public:
  Expr(const std::string& s, int n) : s_(s), n_(n) {}

  double parse() {
    double v = sum();
    ws();
    if (i_ != s_.size()) fail();
    return v;
  }

 private:
  void ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool take(char c) {
    ws();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail() const { throw ConfigError("bad expression: " + s_); }

  double sum() {
    double v = product();
    for (;;) {
      if (take('+')) v += product();
      else if (take('-')) v -= product();
      else return v;
    }
  }
  double product() {
    double v = power();
    for (;;) {
      if (take('*')) v *= power();
      else if (take('/')) v /= power();
      else return v;
    }
  }
  double power() {
    double v = unary();
    if (take('^')) v = std::pow(v, power());
    return v;
  }
  double unary() {
    if (take('-')) return -unary();
    return atom();
  }
  double atom() {
    ws();
    if (take('(')) {
      double v = sum();
      if (!take(')')) fail();
      return v;
    }
    if (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) {
      std::size_t used = 0;
      double v = std::stod(s_.substr(i_), &used);
      i_ += used;
      return v;
    }
    std::size_t b = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
    const std::string name = s_.substr(b, i_ - b);
    if (name == "n") return n_;
    if (name.empty()) fail();
    if (!take('(')) fail();
    double a = sum();
    if (!take(')')) fail();
    if (name == "sqrt") return std::sqrt(a);
    if (name == "log2") return std::log2(a);
    if (name == "ceil") return std::ceil(a - 1e-9);
    if (name == "floor") return std::floor(a + 1e-9);
    fail();
  }

  const std::string& s_;
  int n_;
  std::size_t i_ = 0;
};

}  // namespace

double eval_expression(const std::string& expr, int n) { return Expr(expr, n).parse(); }

SeedRange parse_seed_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) throw ConfigError("seed range must look like a..b: " + s);
  try {
    std::size_t u1 = 0, u2 = 0;
    const std::string a = s.substr(0, dots), b = s.substr(dots + 2);
    SeedRange r{std::stoull(a, &u1), std::stoull(b, &u2)};
    if (u1 != a.size() || u2 != b.size() || a.empty() || b.empty()) throw ConfigError("");
    if (r.last < r.first) throw ConfigError("empty seed range: " + s);
    return r;
  } catch (const ConfigError& e) {
    if (std::string(e.what()).empty()) throw ConfigError("bad seed range: " + s);
    throw;
  } catch (const std::exception&) {
    throw ConfigError("bad seed range: " + s);
  }
}

// ---------------------------------------------------------------------------
// Config

int ExperimentConfig::budget() const { return t >= 0 ? t : adversary::budget_of(n, beta); }

int ExperimentConfig::alpha_value() const {
  const double v = eval_expression(alpha, n);
  const double r = std::round(v);
  if (!std::isfinite(v) || std::abs(v - r) > 1e-9 || r < 0) {
    throw ConfigError("alpha expression must give a non-negative integer: " + alpha);
  }
  return static_cast<int>(r);
}

protocols::ProtocolParams ExperimentConfig::protocol_params() const {
  protocols::ProtocolParams p;
  p.n = n;
  p.kappa = kappa;
  p.committee = committee;
  p.delta = delta;
  p.sig_threshold = sig_threshold;
  p.reducer = reducer;
  p.bridges = bridges;
  p.prime = prime;
  return p;
}

adversary::AttackParams ExperimentConfig::attack_params() const {
  adversary::AttackParams a;
  a.beta = beta;
  a.alpha = alpha_value();
  a.threshold = threshold;
  a.kappa = kappa;
  return a;
}

json ExperimentConfig::to_json() const {
  return {{"id", id},
          {"protocol", protocol},
          {"adversary", adversary},
          {"n", n},
          {"beta", beta},
          {"t", t},
          {"kappa", kappa},
          {"delta", delta},
          {"committee", committee},
          {"sig_threshold", sig_threshold},
          {"reducer", reducer},
          {"bridges", bridges},
          {"prime", prime},
          {"alpha", alpha},
          {"threshold", threshold},
          {"channel", channel},
          {"ideal_mode", ideal_mode},
          {"honesty", honesty},
          {"seeds", std::to_string(seeds.first) + ".." + std::to_string(seeds.last)},
          {"corrupt", corrupt},
          {"max_corrupt", max_corrupt},
          {"replays", replays},
          {"view_check", view_check},
          {"metrics", metrics},
          {"artifacts", artifacts},
          {"cut_list_cap", cut_list_cap}};
}

namespace {

template <class T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad type for key ") + key);
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be an object");
  ExperimentConfig c;
  static const std::vector<std::string> known = {
      "id",        "protocol",  "adversary",  "n",          "beta",    "t",           "kappa",
      "delta",     "committee", "sig_threshold", "reducer", "bridges", "prime",       "alpha",
      "threshold", "channel",   "ideal_mode", "honesty",    "seeds",   "corrupt",     "max_corrupt",
      "replays",   "view_check", "metrics",   "artifacts",  "cut_list_cap"};
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown key: " + k);
  }
  take(j, "id", c.id);
  take(j, "protocol", c.protocol);
  take(j, "adversary", c.adversary);
  take(j, "n", c.n);
  take(j, "beta", c.beta);
  take(j, "t", c.t);
  take(j, "kappa", c.kappa);
  take(j, "delta", c.delta);
  take(j, "committee", c.committee);
  take(j, "sig_threshold", c.sig_threshold);
  take(j, "reducer", c.reducer);
  take(j, "bridges", c.bridges);
  take(j, "prime", c.prime);
  if (j.contains("alpha")) {
    const auto& a = j.at("alpha");
    if (a.is_number_integer()) c.alpha = std::to_string(a.get<long long>());
    else if (a.is_string()) c.alpha = a.get<std::string>();
    else throw ConfigError("alpha must be an integer or an expression");
  }
  take(j, "threshold", c.threshold);
  take(j, "channel", c.channel);
  take(j, "ideal_mode", c.ideal_mode);
  take(j, "honesty", c.honesty);
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    if (s.is_string()) {
      c.seeds = parse_seed_range(s.get<std::string>());
    } else if (s.is_array() && s.size() == 2 && s[0].is_number_unsigned() && s[1].is_number_unsigned()) {
      c.seeds = {s[0].get<std::uint64_t>(), s[1].get<std::uint64_t>()};
      if (c.seeds.last < c.seeds.first) throw ConfigError("empty seed range");
    } else {
      throw ConfigError("seeds must be \"a..b\" or [a, b]");
    }
  } else {
    throw ConfigError("missing key: seeds");
  }
  take(j, "corrupt", c.corrupt);
  take(j, "max_corrupt", c.max_corrupt);
  take(j, "replays", c.replays);
  take(j, "view_check", c.view_check);
  take(j, "metrics", c.metrics);
  take(j, "artifacts", c.artifacts);
  take(j, "cut_list_cap", c.cut_list_cap);
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  if (c.id.empty()) throw ConfigError("missing experiment id");
  if (c.id.find_first_of("/\\") != std::string::npos || c.id == "." || c.id == "..") {
    throw ConfigError("experiment id must be a plain name: " + c.id);
  }
  const auto pids = protocols::protocol_ids();
  if (std::find(pids.begin(), pids.end(), c.protocol) == pids.end()) {
    throw ConfigError("unknown protocol: " + c.protocol);
  }
  const auto aids = adversary::adversary_ids();
  if (std::find(aids.begin(), aids.end(), c.adversary) == aids.end()) {
    throw ConfigError("unknown adversary: " + c.adversary);
  }
  const auto rids = protocols::reducer_ids();
  if (std::find(rids.begin(), rids.end(), c.reducer) == rids.end()) {
    throw ConfigError("unknown reducer: " + c.reducer);
  }
  if (c.seeds.last < c.seeds.first) throw ConfigError("empty seed range");
  if (c.n < 2) throw ConfigError("n must be at least 2");
  if (c.kappa < 1) throw ConfigError("kappa must be positive");
  if (!(c.beta > 0 && c.beta <= 1)) throw ConfigError("beta must be in (0, 1]");
  if (c.t > c.n) throw ConfigError("t exceeds n");
  if (c.cut_list_cap < 0) throw ConfigError("cut_list_cap must be non-negative");
  for (int p : c.corrupt) {
    if (p < 0 || p >= c.n) throw ConfigError("corrupt index out of range");
  }
  try {
    netsim::parse_channel(c.channel);
    netsim::parse_ideal_mode(c.ideal_mode);
    netsim::parse_honesty(c.honesty);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  (void)c.alpha_value();
  if (c.adversary == "isolate-honest" || c.adversary == "isolate-corrupt") {
    if (c.protocol != "flooding" && c.protocol != "strawman") {
      throw ConfigError("isolation attacks need a plain-model protocol, not " + c.protocol);
    }
    if (c.t >= 0 && c.t != adversary::budget_of(c.n, c.beta)) {
      throw ConfigError("isolation attacks use t = floor(beta n)");
    }
  }
  if (c.view_check && c.adversary != "isolate-corrupt") {
    throw ConfigError("view_check needs adversary isolate-corrupt");
  }
  // Protocol parameter checks live with the protocols.
  try {
    (void)protocols::make_protocol(c.protocol, c.protocol_params());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

json read_config_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config", path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto ext = path.extension().string();
  json j;
  if (ext == ".json") {
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("json: ") + e.what());
    }
  } else if (ext == ".toml") {
    j = parse_toml_subset(text);
  } else {
    throw ConfigError("config must be .json or .toml: " + path.string());
  }
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_config_document(path));
}

}  // namespace commlab::harness
