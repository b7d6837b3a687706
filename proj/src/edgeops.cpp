#include "hetedge/edgeops.hpp"

#include "hetedge/parallel.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>

namespace hetedge {

std::string_view to_string(Combiner c) noexcept {
  switch (c) {
    case Combiner::average: return "average";
    case Combiner::hadamard: return "hadamard";
    case Combiner::concatenate: return "concatenate";
  }
  return "average";
}

Combiner parse_combiner(std::string_view name) {
  if (name == "average") return Combiner::average;
  if (name == "hadamard") return Combiner::hadamard;
  if (name == "concatenate") return Combiner::concatenate;
  throw Error("unknown combiner '" + std::string(name) + "'");
}

std::string_view to_string(Fallback f) noexcept { return f == Fallback::zero ? "zero" : "initialized"; }

Fallback parse_fallback(std::string_view name) {
  if (name == "zero") return Fallback::zero;
  if (name == "initialized" || name == "init") return Fallback::initialized;
  throw Error("unknown fallback '" + std::string(name) + "'");
}

namespace {
void combine_into(std::span<const double> u, std::span<const double> v, Combiner mode, double* out) {
  const std::size_t d = u.size();
  switch (mode) {
    case Combiner::average:
      for (std::size_t i = 0; i < d; ++i) out[i] = 0.5 * (u[i] + v[i]);
      break;
    case Combiner::hadamard:
      for (std::size_t i = 0; i < d; ++i) out[i] = u[i] * v[i];
      break;
    case Combiner::concatenate:
      std::copy(u.begin(), u.end(), out);
      std::copy(v.begin(), v.end(), out + d);
      break;
  }
}
}  // namespace

EdgeVector combine(std::span<const double> u, std::span<const double> v, Combiner mode) {
  if (u.size() != v.size()) {
    throw Error("combine: length mismatch (" + std::to_string(u.size()) + " vs " + std::to_string(v.size()) + ")");
  }
  EdgeVector e;
  e.combiner = mode;
  e.values.resize(combined_length(mode, u.size()));
  combine_into(u, v, mode, e.values.data());
  return e;
}

std::size_t HeteroEdgeFeatures::total_length() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.values.size();
  return n;
}

std::vector<double> HeteroEdgeFeatures::flatten() const {
  std::vector<double> out;
  out.reserve(total_length());
  for (const auto& b : blocks) out.insert(out.end(), b.values.begin(), b.values.end());
  return out;
}

// --------------------------------------------------------- FeatureAssembler

FeatureAssembler::FeatureAssembler(std::vector<const EmbeddingTable*> tables, Combiner mode, Fallback fallback)
    : tables_(std::move(tables)), mode_(mode), fallback_(fallback) {
  if (tables_.empty()) throw Error("feature assembler: at least one embedding table required");
  dim_ = tables_.front()->dim;
  num_nodes_ = tables_.front()->num_nodes;
  for (const auto* t : tables_) {
    if (t->dim != dim_) {
      throw Error("feature assembler: mixed embedding dimensions (" + std::to_string(t->dim) + " vs " +
                  std::to_string(dim_) + ")");
    }
    if (t->num_nodes != num_nodes_) throw Error("feature assembler: tables cover different node sets");
  }
  zeros_.assign(dim_, 0.0);
}

std::vector<std::size_t> FeatureAssembler::block_sizes() const {
  return std::vector<std::size_t>(tables_.size(), block_length());
}

std::vector<std::string> FeatureAssembler::space_names() const {
  std::vector<std::string> names;
  for (const auto* t : tables_) names.push_back(t->space);
  return names;
}

std::span<const double> FeatureAssembler::node_row(std::size_t space, NodeId v) const {
  const EmbeddingTable& t = *tables_[space];
  if (fallback_ == Fallback::zero && !t.is_active(v)) return zeros_;
  return t.row(v);
}

void FeatureAssembler::assemble_into(NodeId a, NodeId b, std::span<double> out) const {
  if (a >= num_nodes_ || b >= num_nodes_) throw std::out_of_range("assemble: node id out of range");
  if (out.size() != tables_.size() * block_length()) throw Error("assemble: output span has the wrong length");
  const NodeId u = std::min(a, b);
  const NodeId v = std::max(a, b);
  for (std::size_t s = 0; s < tables_.size(); ++s) {
    combine_into(node_row(s, u), node_row(s, v), mode_, out.data() + s * block_length());
  }
}

HeteroEdgeFeatures FeatureAssembler::assemble(NodeId a, NodeId b) const {
  if (a >= num_nodes_ || b >= num_nodes_) throw std::out_of_range("assemble: node id out of range");
  HeteroEdgeFeatures f;
  f.u = std::min(a, b);
  f.v = std::max(a, b);
  f.combiner = mode_;
  for (std::size_t s = 0; s < tables_.size(); ++s) {
    EdgeVector e = combine(node_row(s, f.u), node_row(s, f.v), mode_);
    e.space = tables_[s]->space;
    f.blocks.push_back(std::move(e));
  }
  return f;
}

HeteroEdgeFeatures assemble(std::span<const EmbeddingTable> tables, NodeId a, NodeId b, Combiner mode,
                            Fallback fallback) {
  std::vector<const EmbeddingTable*> ptrs;
  for (const auto& t : tables) ptrs.push_back(&t);
  return FeatureAssembler(std::move(ptrs), mode, fallback).assemble(a, b);
}

// --------------------------------------------------------------- FeatureSet

std::size_t FeatureSet::width() const {
  return std::accumulate(block_sizes.begin(), block_sizes.end(), std::size_t{0});
}

std::size_t FeatureSet::block_offset(std::size_t t) const {
  return std::accumulate(block_sizes.begin(), block_sizes.begin() + static_cast<std::ptrdiff_t>(t), std::size_t{0});
}

std::vector<int> FeatureSet::labels() const {
  std::vector<int> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.label);
  return out;
}

FeatureSet FeatureSet::subset(std::span<const std::size_t> indices) const {
  FeatureSet out;
  out.spaces = spaces;
  out.block_sizes = block_sizes;
  out.combiner = combiner;
  out.provenance = provenance;
  const std::size_t w = width();
  out.data.reserve(indices.size() * w);
  for (std::size_t i : indices) {
    out.pairs.push_back(pairs.at(i));
    auto r = row(i);
    out.data.insert(out.data.end(), r.begin(), r.end());
  }
  return out;
}

FeatureSet build_features(const FeatureAssembler& assembler, std::span<const LabeledPair> pairs, int threads) {
  FeatureSet fs;
  fs.spaces = assembler.space_names();
  fs.block_sizes = assembler.block_sizes();
  fs.combiner = assembler.combiner();
  fs.pairs.reserve(pairs.size());
  for (const auto& p : pairs) {
    fs.pairs.push_back({std::min(p.u, p.v), std::max(p.u, p.v), p.label});
  }
  const std::size_t w = fs.width();
  fs.data.assign(pairs.size() * w, 0.0);
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
  bool failed = false;
#pragma omp parallel for schedule(static) num_threads(resolve_threads(threads)) \
    reduction(|| : failed) if (threads != 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& p = fs.pairs[static_cast<std::size_t>(i)];
    if (p.u >= assembler.num_nodes() || p.v >= assembler.num_nodes()) {
      failed = true;
      continue;
    }
    assembler.assemble_into(p.u, p.v, {fs.data.data() + static_cast<std::size_t>(i) * w, w});
  }
  if (failed) throw std::out_of_range("build_features: pair references a node outside the embedding tables");
  return fs;
}

// ---------------------------------------------------------------------- I/O

namespace {
constexpr std::string_view kFeatMagic = "HETEDGE-FEAT v1";

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("features: truncated file");
  return v;
}
}  // namespace

void write_features(std::ostream& out, const FeatureSet& fs) {
  out << kFeatMagic << '\n';
  put<std::uint32_t>(out, static_cast<std::uint32_t>(fs.combiner));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(fs.spaces.size()));
  for (std::size_t t = 0; t < fs.spaces.size(); ++t) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(fs.spaces[t].size()));
    out.write(fs.spaces[t].data(), static_cast<std::streamsize>(fs.spaces[t].size()));
    put<std::uint64_t>(out, fs.block_sizes[t]);
  }
  put<std::uint64_t>(out, fs.provenance);
  put<std::uint64_t>(out, fs.rows());
  for (std::size_t i = 0; i < fs.rows(); ++i) {
    put<std::uint32_t>(out, fs.pairs[i].u);
    put<std::uint32_t>(out, fs.pairs[i].v);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(fs.pairs[i].label));
    auto r = fs.row(i);
    out.write(reinterpret_cast<const char*>(r.data()), static_cast<std::streamsize>(r.size() * sizeof(double)));
  }
}

FeatureSet read_features(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header != kFeatMagic) {
    throw FormatError("features: missing or unsupported header (expected '" + std::string(kFeatMagic) + "')");
  }
  FeatureSet fs;
  const auto combiner = get<std::uint32_t>(in);
  if (combiner > 2) throw FormatError("features: bad combiner tag");
  fs.combiner = static_cast<Combiner>(combiner);
  const auto nspaces = get<std::uint32_t>(in);
  for (std::uint32_t t = 0; t < nspaces; ++t) {
    const auto len = get<std::uint32_t>(in);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw FormatError("features: truncated file");
    fs.spaces.push_back(std::move(name));
    fs.block_sizes.push_back(get<std::uint64_t>(in));
  }
  fs.provenance = get<std::uint64_t>(in);
  const auto rows = get<std::uint64_t>(in);
  const std::size_t w = fs.width();
  fs.pairs.reserve(rows);
  fs.data.resize(rows * w);
  for (std::uint64_t i = 0; i < rows; ++i) {
    LabeledPair p;
    p.u = get<std::uint32_t>(in);
    p.v = get<std::uint32_t>(in);
    p.label = get<std::uint8_t>(in);
    fs.pairs.push_back(p);
    if (!in.read(reinterpret_cast<char*>(fs.data.data() + i * w), static_cast<std::streamsize>(w * sizeof(double)))) {
      throw FormatError("features: truncated file");
    }
  }
  return fs;
}

}  // namespace hetedge
