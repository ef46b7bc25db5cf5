#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fjgame/error.hpp"
#include "fjgame/graph.hpp"
#include "fjgame/opinions.hpp"
#include "fjgame/strategic.hpp"

namespace fjgame::io {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// Splits on commas if present, otherwise on whitespace.
inline std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  const bool csv = line.find(',') != std::string_view::npos;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    if (csv) {
      const auto next = line.find(',', pos);
      out.push_back(trim(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
      if (next == std::string_view::npos) break;
      pos = next + 1;
    } else {
      const auto start = line.find_first_not_of(" \t\r", pos);
      if (start == std::string_view::npos) break;
      const auto end = line.find_first_of(" \t\r", start);
      out.push_back(line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
      if (end == std::string_view::npos) break;
      pos = end;
    }
  }
  return out;
}

inline std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> to_integer(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

[[noreturn]] inline void parse_failure(const std::string& source, std::size_t line, const std::string& what) {
  throw Error(ErrorKind::ParseError, source + ":" + std::to_string(line) + ": " + what);
}

/// Calls fn(line_number, content) for every non-blank line not starting with
/// '#'; comment lines go to on_comment (text after the '#').
template <typename Fn, typename Comment>
void for_each_data_line(std::istream& in, Fn&& fn, Comment&& on_comment) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string_view t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      on_comment(trim(t.substr(1)));
      continue;
    }
    fn(number, t);
  }
}

template <typename Fn>
void for_each_data_line(std::istream& in, Fn&& fn) {
  for_each_data_line(in, std::forward<Fn>(fn), [](std::string_view) {});
}

inline std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  return in;
}

}  // namespace detail

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

/// Edge list `u v [w]`, 0-based nodes, '#' comments. The graph has
/// max(min_nodes, largest index + 1, N) nodes, where N comes from an optional
/// `# nodes N` comment (written by write_edge_list to keep isolated nodes).
inline WeightedGraph parse_edge_list(std::istream& in, Index min_nodes = 0, const std::string& source = "edges") {
  std::vector<Edge> edges;
  Index n = min_nodes;
  detail::for_each_data_line(in, [&](std::size_t line, std::string_view text) {
    const auto f = detail::fields(text);
    if (f.size() != 2 && f.size() != 3) detail::parse_failure(source, line, "expected 'u v [w]'");
    const auto u = detail::to_integer(f[0]);
    const auto v = detail::to_integer(f[1]);
    if (!u || !v || *u < 0 || *v < 0) detail::parse_failure(source, line, "node ids must be nonnegative integers");
    double w = 1.0;
    if (f.size() == 3) {
      const auto parsed = detail::to_double(f[2]);
      if (!parsed) detail::parse_failure(source, line, "bad weight '" + std::string(f[2]) + "'");
      w = *parsed;
    }
    edges.push_back({static_cast<Index>(*u), static_cast<Index>(*v), w});
    n = std::max<Index>(n, static_cast<Index>(std::max(*u, *v)) + 1);
  }, [&](std::string_view comment) {
    if (comment.substr(0, 6) != "nodes ") return;
    if (const auto declared = detail::to_integer(comment.substr(6)); declared && *declared >= 0) {
      n = std::max<Index>(n, static_cast<Index>(*declared));
    }
  });
  return WeightedGraph(n, std::move(edges));
}

inline WeightedGraph read_edge_list(const std::string& path, Index min_nodes = 0) {
  std::ifstream in = detail::open(path);
  return parse_edge_list(in, min_nodes, path);
}

/// One value per line (line k = node k) or `node,value` rows; a `node,value`
/// header line is skipped. Every node 0..n-1 must appear exactly once.
inline Eigen::VectorXd parse_vector(std::istream& in, const std::string& source = "values") {
  std::vector<std::pair<long long, double>> keyed;
  std::vector<double> plain;
  bool first = true;
  detail::for_each_data_line(in, [&](std::size_t line, std::string_view text) {
    const auto f = detail::fields(text);
    const bool header = first && !detail::to_double(f.back());
    first = false;
    if (header) return;
    if (f.size() == 1) {
      const auto v = detail::to_double(f[0]);
      if (!v) detail::parse_failure(source, line, "bad number '" + std::string(f[0]) + "'");
      plain.push_back(*v);
    } else if (f.size() == 2) {
      const auto k = detail::to_integer(f[0]);
      const auto v = detail::to_double(f[1]);
      if (!k || *k < 0 || !v) detail::parse_failure(source, line, "expected 'node,value'");
      keyed.emplace_back(*k, *v);
    } else {
      detail::parse_failure(source, line, "expected one value or 'node,value'");
    }
  });
  if (!plain.empty() && !keyed.empty()) throw Error(ErrorKind::ParseError, source + ": mixed line formats");
  if (keyed.empty()) return Eigen::Map<const Eigen::VectorXd>(plain.data(), static_cast<Index>(plain.size()));

  Eigen::VectorXd out(static_cast<Index>(keyed.size()));
  std::vector<bool> seen(keyed.size(), false);
  for (const auto& [k, v] : keyed) {
    if (k >= static_cast<long long>(keyed.size()) || seen[static_cast<std::size_t>(k)]) {
      throw Error(ErrorKind::ParseError, source + ": node ids must cover 0..n-1 exactly once");
    }
    seen[static_cast<std::size_t>(k)] = true;
    out(static_cast<Index>(k)) = v;
  }
  return out;
}

inline Eigen::VectorXd read_vector(const std::string& path) {
  std::ifstream in = detail::open(path);
  return parse_vector(in, path);
}

/// `spec` is either a number (shared alpha) or a file path. A file holding a
/// single value also means shared alpha.
inline SusceptibilityProfile read_susceptibility(const std::string& spec, Index n) {
  if (const auto v = detail::to_double(spec)) return SusceptibilityProfile::shared(n, *v);
  const Eigen::VectorXd values = read_vector(spec);
  if (values.size() == 1) return SusceptibilityProfile::shared(n, values(0));
  fjgame::detail::require(values.size() == n, ErrorKind::DimensionMismatch,
                          spec + ": " + std::to_string(values.size()) + " susceptibilities for " + std::to_string(n) +
                              " nodes");
  return SusceptibilityProfile(values);
}

/// One node index per line.
inline StrategicSet parse_strategic_set(std::istream& in, Index n, const std::string& source = "set") {
  std::vector<Index> members;
  detail::for_each_data_line(in, [&](std::size_t line, std::string_view text) {
    const auto k = detail::to_integer(text);
    if (!k) detail::parse_failure(source, line, "expected a node index");
    members.push_back(static_cast<Index>(*k));
  });
  return StrategicSet(std::move(members), n);
}

inline StrategicSet read_strategic_set(const std::string& path, Index n) {
  std::ifstream in = detail::open(path);
  return parse_strategic_set(in, n, path);
}

/// CSV, row k = features of node k, optional non-numeric header line.
inline Eigen::MatrixXd parse_matrix(std::istream& in, const std::string& source = "matrix") {
  std::vector<std::vector<double>> rows;
  bool first = true;
  detail::for_each_data_line(in, [&](std::size_t line, std::string_view text) {
    const auto f = detail::fields(text);
    std::vector<double> row;
    for (std::string_view cell : f) {
      const auto v = detail::to_double(cell);
      if (!v) {
        if (first) {
          first = false;
          return;
        }
        detail::parse_failure(source, line, "bad number '" + std::string(cell) + "'");
      }
      row.push_back(*v);
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size()) detail::parse_failure(source, line, "ragged row");
    rows.push_back(std::move(row));
  });
  if (rows.empty()) throw Error(ErrorKind::ParseError, source + ": no data rows");
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) out(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  }
  return out;
}

inline Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream in = detail::open(path);
  return parse_matrix(in, path);
}

inline void write_edge_list(std::ostream& out, const WeightedGraph& g) {
  out << "# nodes " << g.size() << "\n";
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << ' ' << format_double(e.w) << '\n';
}

inline void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  for (Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << '\n';
}

inline void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(r, c));
    out << '\n';
  }
}

}  // namespace fjgame::io
