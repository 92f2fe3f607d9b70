// Copyright 2026 The hyperheat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hyperheat/graph.hpp"
#include "hyperheat/hypercore.hpp"

namespace hyperheat {

// Text format:
//   n m
//   w v1 v2 ... vk      (m lines; weight first, 0-based vertex ids)
// Everything after '#' on a line is ignored, blank lines are skipped.
// Weighted graphs use the same layout with k = 2 plus self-loop records
// `L v w`; m counts every record line.

namespace detail {

// Next non-empty line with comments stripped; false at end of stream.
inline bool next_record(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

inline ParseError parse_error(int lineno, const std::string& what) {
  return ParseError("line " + std::to_string(lineno) + ": " + what);
}

inline std::pair<long, long> read_header(std::istream& in, int& lineno) {
  std::string line;
  if (!next_record(in, line, lineno)) throw ParseError("missing header line `n m`");
  std::istringstream ss(line);
  long n = -1, m = -1;
  std::string extra;
  if (!(ss >> n >> m) || (ss >> extra) || n < 1 || m < 0)
    throw parse_error(lineno, "header must be `n m` with n >= 1, m >= 0");
  return {n, m};
}

}  // namespace detail

inline Hypergraph read_hypergraph(std::istream& in, bool require_connected = true) {
  int lineno = 0;
  auto [n, m] = detail::read_header(in, lineno);
  std::vector<Hypergraph::Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  std::string line;
  for (long i = 0; i < m; ++i) {
    if (!detail::next_record(in, line, lineno))
      throw ParseError("expected " + std::to_string(m) + " edges, found " + std::to_string(i));
    std::istringstream ss(line);
    Hypergraph::Edge e;
    if (!(ss >> e.weight)) throw detail::parse_error(lineno, "edge weight is not a number");
    long v;
    while (ss >> v) {
      if (v < 0 || v >= n) throw detail::parse_error(lineno, "vertex id out of range");
      e.vertices.push_back(static_cast<int>(v));
    }
    if (!ss.eof()) throw detail::parse_error(lineno, "vertex id is not an integer");
    edges.push_back(std::move(e));
  }
  if (detail::next_record(in, line, lineno))
    throw detail::parse_error(lineno, "trailing content after the last edge");
  try {
    return Hypergraph(static_cast<int>(n), std::move(edges), require_connected);
  } catch (const DomainError& err) {
    throw ParseError(err.what());
  }
}

inline Hypergraph read_hypergraph_file(const std::string& path, bool require_connected = true) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_hypergraph(in, require_connected);
}

inline void write_hypergraph(std::ostream& out, const Hypergraph& g) {
  out << g.num_vertices() << ' ' << g.num_edges() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& e : g.edges()) {
    out << e.weight;
    for (int v : e.vertices) out << ' ' << v;
    out << '\n';
  }
}

inline void write_graph(std::ostream& out, const WeightedGraph& g) {
  const int m = g.num_nodes();
  std::vector<std::string> records;
  std::ostringstream rec;
  rec << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int i = 0; i < m; ++i) {
    if (g.weight(i, i) != 0.0) {
      rec.str("");
      rec << "L " << i << ' ' << g.weight(i, i);
      records.push_back(rec.str());
    }
    for (int j = i + 1; j < m; ++j) {
      if (g.weight(i, j) == 0.0) continue;
      rec.str("");
      rec << g.weight(i, j) << ' ' << i << ' ' << j;
      records.push_back(rec.str());
    }
  }
  out << m << ' ' << records.size() << '\n';
  for (const auto& r : records) out << r << '\n';
}

inline WeightedGraph read_graph(std::istream& in) {
  int lineno = 0;
  auto [n, m] = detail::read_header(in, lineno);
  WeightedGraph g(static_cast<int>(n));
  std::string line;
  for (long i = 0; i < m; ++i) {
    if (!detail::next_record(in, line, lineno))
      throw ParseError("expected " + std::to_string(m) + " records, found " + std::to_string(i));
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    if (head == "L") {
      long v;
      double w;
      if (!(ss >> v >> w) || v < 0 || v >= n) throw detail::parse_error(lineno, "bad self-loop record");
      g.set_self_loop(static_cast<int>(v), g.weight(static_cast<int>(v), static_cast<int>(v)) + w);
    } else {
      double w;
      long a, b;
      std::istringstream hs(head);
      if (!(hs >> w) || !(ss >> a >> b) || a < 0 || b < 0 || a >= n || b >= n || a == b)
        throw detail::parse_error(lineno, "bad edge record, expected `w u v`");
      g.add_edge(static_cast<int>(a), static_cast<int>(b), w);
    }
  }
  return g;
}

}  // namespace hyperheat
