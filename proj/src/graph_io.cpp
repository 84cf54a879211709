// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>

#include "datlas/error.hpp"
#include "datlas/graph.hpp"

namespace datlas {
namespace {

std::string_view skip_ws(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
  return s.substr(i);
}

template <typename T>
bool parse_token(std::string_view& s, T& out) {
  s = skip_ws(s);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if constexpr (std::is_floating_point_v<T>) {
    if (*first == '+') ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{}) return false;
  if (ptr != last && *ptr != ' ' && *ptr != '\t' && *ptr != '\r') return false;
  s = std::string_view(ptr, static_cast<std::size_t>(last - ptr));
  return true;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path.string() + "'");
  return in;
}

std::string format_error(const std::filesystem::path& path, std::size_t line, const char* what) {
  return path.string() + ":" + std::to_string(line) + ": " + what;
}

}  // namespace

std::vector<Edge> read_edge_list(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = skip_ws(line);
    if (s.empty() || s.front() == '#') continue;
    std::uint64_t u = 0, v = 0;
    if (!parse_token(s, u) || !parse_token(s, v) || !skip_ws(s).empty()) {
      fail(ErrorKind::Format, format_error(path, lineno, "expected two nonnegative integer ids"));
    }
    edges.emplace_back(u, v);
  }
  return edges;
}

void write_edge_list(const SparseGraph& g, const std::filesystem::path& path) {
  const auto& labels = g.labels();
  std::vector<std::pair<std::uint64_t, std::uint64_t>> rows;
  rows.reserve(g.num_edges());
  for (const auto& [u, v] : g.edge_list()) {
    rows.emplace_back(std::min(labels[u], labels[v]), std::max(labels[u], labels[v]));
  }
  std::sort(rows.begin(), rows.end());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write '" + path.string() + "'");
  for (const auto& [a, b] : rows) out << a << ' ' << b << '\n';
}

std::unordered_map<std::uint64_t, Point3> read_coords(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::unordered_map<std::uint64_t, Point3> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = skip_ws(line);
    if (s.empty() || s.front() == '#') continue;
    std::uint64_t id = 0;
    Point3 p{};
    if (!parse_token(s, id) || !parse_token(s, p[0]) || !parse_token(s, p[1]) ||
        !parse_token(s, p[2]) || !skip_ws(s).empty()) {
      fail(ErrorKind::Format, format_error(path, lineno, "expected 'id x y z'"));
    }
    if (!out.emplace(id, p).second) {
      fail(ErrorKind::Format, format_error(path, lineno, "duplicate node id"));
    }
  }
  return out;
}

void write_coords(const SparseGraph& g, const std::filesystem::path& path) {
  if (!g.has_coords()) return;
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write '" + path.string() + "'");
  char buf[128];
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const auto& p = g.coords()[i];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", p[0], p[1], p[2]);
    out << g.labels()[i] << ' ' << buf << '\n';
  }
}

BuildReport load_graph(const std::filesystem::path& edges,
                       const std::optional<std::filesystem::path>& coords) {
  require(std::filesystem::exists(edges), ErrorKind::Io,
          "input file not found: '" + edges.string() + "'");
  const auto raw = read_edge_list(edges);
  if (coords) {
    require(std::filesystem::exists(*coords), ErrorKind::Io,
            "coordinates file not found: '" + coords->string() + "'");
    return build_graph(raw, read_coords(*coords));
  }
  return build_graph(raw);
}

}  // namespace datlas
