#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "vista/graph.hpp"
#include "vista/learners.hpp"
#include "vista/markov_blanket.hpp"
#include "vista/synth.hpp"
#include "vista/voting.hpp"

namespace vista {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, int line, const std::string& message)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + message) {}
};

namespace detail {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline int parse_int(const std::string& field, const std::string& path, int line) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(path, line, "expected integer, got '" + field + "'");
  }
  return value;
}

inline long long parse_ll(const std::string& field, const std::string& path, int line) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(path, line, "expected integer, got '" + field + "'");
  }
  return value;
}

inline double parse_double(const std::string& field, const std::string& path, int line) {
  if (field.empty()) throw ParseError(path, line, "empty numeric field");
  char* end = nullptr;
  const double value = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) {
    throw ParseError(path, line, "expected number, got '" + field + "'");
  }
  if (!std::isfinite(value)) throw ParseError(path, line, "non-finite value '" + field + "'");
  return value;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Edge-list TSV: one "u<TAB>v[<TAB>w]" line per edge, '#' comments, header
// optional. A "# n=<count>" comment preserves isolated nodes.
// ---------------------------------------------------------------------------

inline void save_edge_tsv(const std::string& path, const Digraph& g) {
  auto out = detail::open_out(path);
  out << "# n=" << g.node_count() << "\n";
  for (const auto& [u, v] : g.edges()) out << u << "\t" << v << "\n";
}

inline void save_edge_tsv(const std::string& path, const WeightedDigraph& g) {
  auto out = detail::open_out(path);
  out << "# n=" << g.node_count() << "\n";
  for (const auto& [edge, w] : g.weighted_edges()) {
    out << edge.first << "\t" << edge.second << "\t" << detail::format_double(w) << "\n";
  }
}

struct EdgeListFile {
  int n = 0;
  bool weighted = false;
  std::vector<std::tuple<int, int, double>> edges;  // weight 1.0 when unweighted

  Digraph digraph() const {
    Digraph g(n);
    for (const auto& [u, v, w] : edges) g.add_edge(u, v);
    return g;
  }
  WeightedDigraph weighted_digraph() const {
    WeightedDigraph g(n);
    for (const auto& [u, v, w] : edges) g.set_edge(u, v, w);
    return g;
  }
};

inline EdgeListFile load_edge_tsv(const std::string& path) {
  auto in = detail::open_in(path);
  EdgeListFile file;
  std::optional<int> declared_n;
  std::string line;
  int line_no = 0;
  int max_id = -1;
  bool saw_rows = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("n=");
      if (pos != std::string::npos) {
        try {
          declared_n = std::stoi(line.substr(pos + 2));
        } catch (...) {
          throw ParseError(path, line_no, "bad n= comment");
        }
      }
      continue;
    }
    auto fields = detail::split(line, '\t');
    if (fields.size() == 1) fields = detail::split(line, ' ');
    if (!saw_rows && !fields.empty() && !fields[0].empty() &&
        !std::isdigit(static_cast<unsigned char>(fields[0][0])) && fields[0][0] != '-') {
      continue;  // optional header line
    }
    if (fields.size() != 2 && fields.size() != 3) {
      throw ParseError(path, line_no, "expected 2 or 3 tab-separated fields");
    }
    const int u = detail::parse_int(fields[0], path, line_no);
    const int v = detail::parse_int(fields[1], path, line_no);
    if (u < 0 || v < 0) throw ParseError(path, line_no, "negative node id");
    double w = 1.0;
    if (fields.size() == 3) {
      w = detail::parse_double(fields[2], path, line_no);
      file.weighted = true;
    }
    file.edges.emplace_back(u, v, w);
    max_id = std::max({max_id, u, v});
    saw_rows = true;
  }
  file.n = declared_n.value_or(max_id + 1);
  if (file.n <= max_id) {
    throw ParseError(path, 0, "declared n smaller than max node id");
  }
  return file;
}

// ---------------------------------------------------------------------------
// Adjacency-matrix CSV: n rows x n cols, entry (i,j) nonzero iff i->j.
// ---------------------------------------------------------------------------

inline void save_adjacency_csv(const std::string& path, const Digraph& g) {
  auto out = detail::open_out(path);
  const int n = g.node_count();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out << (g.has_edge(i, j) ? 1 : 0) << (j + 1 < n ? "," : "\n");
    }
  }
}

inline Digraph load_adjacency_csv(const std::string& path) {
  auto in = detail::open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = detail::split(line, ',');
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(detail::parse_double(f, path, line_no));
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  Digraph g(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) {
      throw ParseError(path, 0, "adjacency matrix is not square");
    }
    for (int j = 0; j < n; ++j) {
      if (i != j && rows[i][j] != 0.0) g.add_edge(i, j);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// DataMatrix CSV: header row x0,...,x{n-1}, then N rows, full precision.
// ---------------------------------------------------------------------------

inline void save_data_csv(const std::string& path, const DataMatrix& data) {
  auto out = detail::open_out(path);
  const int n = static_cast<int>(data.cols());
  for (int j = 0; j < n; ++j) out << "x" << j << (j + 1 < n ? "," : "\n");
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (int j = 0; j < n; ++j) {
      out << detail::format_double(data(i, j)) << (j + 1 < n ? "," : "\n");
    }
  }
}

inline DataMatrix load_data_csv(const std::string& path) {
  auto in = detail::open_in(path);
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError(path, 1, "missing header row");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const int n = static_cast<int>(detail::split(line, ',').size());
  std::vector<double> values;
  int rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split(line, ',');
    if (static_cast<int>(fields.size()) != n) {
      throw ParseError(path, line_no,
                       "expected " + std::to_string(n) + " fields, got " +
                           std::to_string(fields.size()));
    }
    for (const auto& f : fields) values.push_back(detail::parse_double(f, path, line_no));
    ++rows;
  }
  DataMatrix data(rows, n);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < n; ++j) data(i, j) = values[static_cast<std::size_t>(i) * n + j];
  }
  return data;
}

// ---------------------------------------------------------------------------
// Vote tally CSV (EdgeCount matrix) with optional '#' comments; a
// "# config_hash=<v>" comment keys the cache.
// ---------------------------------------------------------------------------

inline void save_votes_csv(const std::string& path, const VoteTally& tally,
                           std::optional<std::uint64_t> config_hash = std::nullopt) {
  auto out = detail::open_out(path);
  if (config_hash) out << "# config_hash=" << *config_hash << "\n";
  const int n = tally.node_count();
  out << "# n=" << n << "\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out << tally.edge_count(i, j) << (j + 1 < n ? "," : "\n");
    }
  }
}

struct VotesFile {
  VoteTally tally;
  std::optional<std::uint64_t> config_hash;
};

inline VotesFile load_votes_csv(const std::string& path) {
  auto in = detail::open_in(path);
  VotesFile file;
  std::vector<std::vector<long long>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("config_hash=");
      if (pos != std::string::npos) {
        try {
          file.config_hash = std::stoull(line.substr(pos + 12));
        } catch (...) {
          throw ParseError(path, line_no, "bad config_hash comment");
        }
      }
      continue;
    }
    const auto fields = detail::split(line, ',');
    std::vector<long long> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(detail::parse_ll(f, path, line_no));
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  file.tally = VoteTally(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) {
      throw ParseError(path, 0, "vote matrix is not square");
    }
    for (int j = 0; j < n; ++j) {
      if (rows[i][j] < 0) throw ParseError(path, 0, "negative vote count");
      for (long long c = 0; c < rows[i][j]; ++c) file.tally.add_vote(i, j);
    }
  }
  return file;
}

inline void save_score_csv(const std::string& path, const Eigen::MatrixXd& scores) {
  auto out = detail::open_out(path);
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      out << detail::format_double(scores(i, j)) << (j + 1 < scores.cols() ? "," : "\n");
    }
  }
}

// ---------------------------------------------------------------------------
// JSON artifacts.
// ---------------------------------------------------------------------------

inline void save_mb_json(const std::string& path, const std::vector<MarkovBlanket>& blankets) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& mb : blankets) j[std::to_string(mb.target)] = mb.members;
  detail::open_out(path) << j.dump(2) << "\n";
}

inline std::vector<MarkovBlanket> load_mb_json(const std::string& path) {
  nlohmann::json j;
  try {
    detail::open_in(path) >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
  std::vector<MarkovBlanket> blankets(j.size());
  for (const auto& [key, value] : j.items()) {
    MarkovBlanket mb;
    mb.target = std::stoi(key);
    mb.members = value.get<std::vector<int>>();
    std::sort(mb.members.begin(), mb.members.end());
    if (mb.target < 0 || mb.target >= static_cast<int>(blankets.size())) {
      throw ParseError(path, 0, "node id out of range: " + key);
    }
    blankets[mb.target] = std::move(mb);
  }
  return blankets;
}

/// Local graphs as a JSON list of {node, edges: [[u_global, v_global], ...]}.
inline void save_locals_json(const std::string& path, const std::vector<LocalGraph>& locals) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& lg : locals) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, b] : lg.graph.edges()) {
      edges.push_back({lg.global_ids[a], lg.global_ids[b]});
    }
    j.push_back({{"node", lg.node}, {"edges", edges}});
  }
  detail::open_out(path) << j.dump(2) << "\n";
}

struct LocalEdges {
  int node = 0;
  std::vector<std::pair<int, int>> edges;  // global ids
};

inline std::vector<LocalEdges> load_locals_json(const std::string& path) {
  nlohmann::json j;
  try {
    detail::open_in(path) >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
  std::vector<LocalEdges> locals;
  for (const auto& item : j) {
    LocalEdges le;
    le.node = item.at("node").get<int>();
    for (const auto& e : item.at("edges")) {
      le.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    locals.push_back(std::move(le));
  }
  return locals;
}

}  // namespace vista
