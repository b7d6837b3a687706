#include "hetedge/multigraph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hetedge {

// ---------------------------------------------------------------- EdgeSchema

EdgeSchema::EdgeSchema() : EdgeSchema({"contact", "friend", "chat"}, true) {}

EdgeSchema::EdgeSchema(std::vector<std::string> names, bool closed)
    : names_(std::move(names)), closed_(closed) {
  if (names_.empty() && closed_) {
    throw Error("edge schema: a closed schema needs at least one type");
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw Error("edge schema: empty type name");
    for (std::size_t j = 0; j < i; ++j) {
      if (names_[i] == names_[j]) throw Error("edge schema: duplicate type '" + names_[i] + "'");
    }
  }
}

std::optional<TypeIndex> EdgeSchema::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<TypeIndex>(i);
  }
  return std::nullopt;
}

TypeIndex EdgeSchema::index_of(std::string_view name) const {
  if (auto t = find(name)) return *t;
  throw Error("undeclared edge type '" + std::string(name) + "'");
}

TypeIndex EdgeSchema::intern(std::string_view name) {
  if (auto t = find(name)) return *t;
  if (closed_) throw Error("unknown edge type '" + std::string(name) + "' (schema is closed)");
  if (name.empty()) throw Error("edge schema: empty type name");
  names_.emplace_back(name);
  return static_cast<TypeIndex>(names_.size() - 1);
}

// ------------------------------------------------------------------ LabelMap

NodeId LabelMap::intern(std::string_view label) {
  auto it = index_.find(std::string(label));
  if (it != index_.end()) return it->second;
  const auto id = static_cast<NodeId>(labels_.size());
  labels_.emplace_back(label);
  index_.emplace(labels_.back(), id);
  return id;
}

std::optional<NodeId> LabelMap::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeId LabelMap::id(std::string_view label) const {
  if (auto v = find(label)) return *v;
  throw Error("unknown node label '" + std::string(label) + "'");
}

// ----------------------------------------------------------------------- Csr

bool Csr::has_edge(NodeId u, NodeId v) const {
  auto a = adj(u);
  return std::binary_search(a.begin(), a.end(), v);
}

namespace {

Csr build_csr(std::size_t n, std::vector<std::pair<NodeId, NodeId>> edges) {
  // Symmetrize, then sort + unique gives the per-type dedup and sorted lists.
  const std::size_t m = edges.size();
  edges.reserve(2 * m);
  for (std::size_t i = 0; i < m; ++i) edges.emplace_back(edges[i].second, edges[i].first);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  Csr csr;
  csr.offsets.assign(n + 1, 0);
  for (const auto& [u, v] : edges) ++csr.offsets[u + 1];
  for (std::size_t i = 0; i < n; ++i) csr.offsets[i + 1] += csr.offsets[i];
  csr.neighbors.reserve(edges.size());
  for (const auto& e : edges) csr.neighbors.push_back(e.second);
  return csr;
}

void validate_csr(const Csr& c, std::size_t n) {
  if (c.offsets.size() != n + 1 || c.offsets.front() != 0 || c.offsets.back() != c.neighbors.size()) {
    throw FormatError("graph snapshot: inconsistent offsets");
  }
  for (std::size_t u = 0; u < n; ++u) {
    if (c.offsets[u] > c.offsets[u + 1]) throw FormatError("graph snapshot: offsets not monotone");
    auto a = c.adj(static_cast<NodeId>(u));
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] >= n || a[i] == u || (i > 0 && a[i - 1] >= a[i])) {
        throw FormatError("graph snapshot: invalid neighbor list for node " + std::to_string(u));
      }
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (NodeId v : c.adj(static_cast<NodeId>(u))) {
      if (!c.has_edge(v, static_cast<NodeId>(u))) throw FormatError("graph snapshot: asymmetric adjacency");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- MultiGraph

MultiGraph::MultiGraph()
    : MultiGraph(EdgeSchema(), LabelMap(), std::vector<Csr>(EdgeSchema().size(), Csr{{0}, {}})) {}

MultiGraph::MultiGraph(EdgeSchema schema, LabelMap labels, std::vector<Csr> per_type)
    : schema_(std::move(schema)), labels_(std::move(labels)), per_type_(std::move(per_type)) {
  if (per_type_.size() != schema_.size()) throw Error("multigraph: one adjacency per declared type required");
  for (const auto& c : per_type_) validate_csr(c, labels_.size());
}

void MultiGraph::check_node(NodeId u) const {
  if (u >= num_nodes()) {
    throw std::out_of_range("node id " + std::to_string(u) + " out of range (N=" +
                            std::to_string(num_nodes()) + ")");
  }
}

std::span<const NodeId> MultiGraph::adj(NodeId u, TypeIndex t) const {
  check_node(u);
  return per_type_.at(t).adj(u);
}

std::size_t MultiGraph::degree(NodeId u, std::optional<TypeIndex> t) const {
  check_node(u);
  if (t) return per_type_.at(*t).degree(u);
  std::size_t d = 0;
  for (const auto& c : per_type_) d += c.degree(u);
  return d;
}

std::size_t MultiGraph::total_edge_count() const {
  std::size_t m = 0;
  for (const auto& c : per_type_) m += c.edge_count();
  return m;
}

bool MultiGraph::has_edge(NodeId u, NodeId v, TypeIndex t) const {
  check_node(u);
  check_node(v);
  return per_type_.at(t).has_edge(u, v);
}

std::uint64_t MultiGraph::content_hash() const {
  std::ostringstream os;
  write_graph(os, *this);
  return fnv1a(os.str());
}

// --------------------------------------------------------- MultiGraphBuilder

MultiGraphBuilder::MultiGraphBuilder(EdgeSchema schema)
    : schema_(std::move(schema)), edges_(schema_.size()) {}

bool MultiGraphBuilder::add_edge(std::string_view src, std::string_view dst, std::string_view type) {
  const TypeIndex t = schema_.intern(type);
  if (t >= edges_.size()) edges_.resize(t + 1);
  if (src == dst) return false;
  return add_edge(labels_.intern(src), labels_.intern(dst), t);
}

bool MultiGraphBuilder::add_edge(NodeId u, NodeId v, TypeIndex t) {
  if (t >= schema_.size()) throw Error("edge type index " + std::to_string(t) + " not declared");
  if (u >= labels_.size() || v >= labels_.size()) throw std::out_of_range("edge endpoint not a known node");
  if (u == v) return false;
  if (t >= edges_.size()) edges_.resize(t + 1);
  edges_[t].emplace_back(u, v);
  return true;
}

void MultiGraphBuilder::add_numbered_nodes(std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) labels_.intern(std::to_string(i));
}

MultiGraph MultiGraphBuilder::build() const {
  std::vector<Csr> per_type;
  per_type.reserve(schema_.size());
  for (std::size_t t = 0; t < schema_.size(); ++t) {
    per_type.push_back(build_csr(labels_.size(), t < edges_.size() ? edges_[t] : decltype(edges_)::value_type{}));
  }
  return MultiGraph(schema_, labels_, std::move(per_type));
}

// ------------------------------------------------------------------- loading

LoadResult load_edge_list(std::istream& in, EdgeSchema schema) {
  MultiGraphBuilder builder(std::move(schema));
  LoadResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto tab = rest.find('\t');
      fields.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (fields.size() != 3) {
      throw ParseError(lineno, "expected 3 tab-separated fields (src, dst, type), got " +
                                   std::to_string(fields.size()));
    }
    for (auto f : fields) {
      if (f.empty()) throw ParseError(lineno, "empty field");
    }
    if (fields[0] == fields[1]) {
      result.rejected.push_back({lineno, "self-loop on '" + std::string(fields[0]) + "'"});
      continue;
    }
    try {
      builder.add_edge(fields[0], fields[1], fields[2]);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
  }
  result.graph = builder.build();
  return result;
}

LoadResult load_edge_list_file(const std::string& path, EdgeSchema schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list '" + path + "'");
  return load_edge_list(in, std::move(schema));
}

HomogeneousGraph split_by_type(const MultiGraph& g, TypeIndex t) {
  if (t >= g.num_types()) throw Error("undeclared edge type index " + std::to_string(t));
  return HomogeneousGraph(g.num_nodes(), g.schema().name(t), g.csr(t));
}

HomogeneousGraph split_by_type(const MultiGraph& g, std::string_view type_name) {
  return split_by_type(g, g.schema().index_of(type_name));
}

// ------------------------------------------------------------------ snapshot

namespace {
constexpr std::string_view kGraphMagic = "HETEDGE-GRAPH v1";

std::string expect_line(std::istream& in, std::size_t& lineno) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(lineno + 1, "graph snapshot: unexpected end of input");
  ++lineno;
  return line;
}

template <typename T>
std::vector<T> read_numbers(const std::string& line, std::string_view key, std::size_t count, std::size_t lineno) {
  std::istringstream is(line);
  std::string tag;
  is >> tag;
  if (tag != key) throw ParseError(lineno, "graph snapshot: expected '" + std::string(key) + "'");
  std::vector<T> out;
  out.reserve(count);
  unsigned long long v = 0;
  while (is >> v) out.push_back(static_cast<T>(v));
  if (out.size() != count) throw ParseError(lineno, "graph snapshot: wrong number of values for " + std::string(key));
  return out;
}
}  // namespace

void write_graph(std::ostream& out, const MultiGraph& g) {
  out << kGraphMagic << '\n';
  out << "schema " << (g.schema().closed() ? "closed" : "open") << ' ' << g.num_types();
  for (const auto& n : g.schema().names()) out << ' ' << n;
  out << '\n';
  out << "nodes " << g.num_nodes() << '\n';
  for (const auto& l : g.labels().labels()) out << l << '\n';
  for (TypeIndex t = 0; t < g.num_types(); ++t) {
    const Csr& c = g.csr(t);
    out << "type " << g.schema().name(t) << ' ' << c.edge_count() << '\n';
    out << "offsets";
    for (auto o : c.offsets) out << ' ' << o;
    out << "\nneighbors";
    for (auto v : c.neighbors) out << ' ' << v;
    out << '\n';
  }
}

MultiGraph read_graph(std::istream& in) {
  std::size_t lineno = 0;
  if (expect_line(in, lineno) != kGraphMagic) {
    throw FormatError("graph snapshot: missing or unsupported header (expected '" + std::string(kGraphMagic) + "')");
  }
  std::istringstream schema_line(expect_line(in, lineno));
  std::string tag, closed;
  std::size_t ntypes = 0;
  schema_line >> tag >> closed >> ntypes;
  if (tag != "schema" || (closed != "closed" && closed != "open")) throw ParseError(lineno, "graph snapshot: bad schema line");
  std::vector<std::string> names(ntypes);
  for (auto& n : names) {
    if (!(schema_line >> n)) throw ParseError(lineno, "graph snapshot: truncated schema line");
  }
  EdgeSchema schema(std::move(names), closed == "closed");

  std::istringstream nodes_line(expect_line(in, lineno));
  std::size_t n = 0;
  nodes_line >> tag >> n;
  if (tag != "nodes" || !nodes_line) throw ParseError(lineno, "graph snapshot: bad nodes line");
  LabelMap labels;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string l = expect_line(in, lineno);
    if (labels.intern(l) != i) throw ParseError(lineno, "graph snapshot: duplicate label '" + l + "'");
  }

  std::vector<Csr> per_type;
  for (std::size_t t = 0; t < ntypes; ++t) {
    std::istringstream type_line(expect_line(in, lineno));
    std::string name;
    std::size_t m = 0;
    type_line >> tag >> name >> m;
    if (tag != "type" || name != schema.name(static_cast<TypeIndex>(t))) {
      throw ParseError(lineno, "graph snapshot: expected type block '" + schema.name(static_cast<TypeIndex>(t)) + "'");
    }
    Csr c;
    c.offsets = read_numbers<std::size_t>(expect_line(in, lineno), "offsets", n + 1, lineno);
    c.neighbors = read_numbers<NodeId>(expect_line(in, lineno), "neighbors", 2 * m, lineno);
    per_type.push_back(std::move(c));
  }
  return MultiGraph(std::move(schema), std::move(labels), std::move(per_type));
}

}  // namespace hetedge
