#include "hetedge/serving.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "hetedge/parallel.hpp"

namespace hetedge {

// ------------------------------------------------------------------ NnIndex

NnIndex::NnIndex(const EmbeddingTable& table)
    : num_nodes_(table.num_nodes), dim_(table.dim), rows_(table.input) {}

// Same arithmetic as cosine(), so scores match a direct scan bit for bit.
double NnIndex::similarity(NodeId a, NodeId b) const {
  return cosine(std::span<const double>(rows_.data() + a * dim_, dim_),
                std::span<const double>(rows_.data() + b * dim_, dim_))
      .value;
}

void NnIndex::check_query(NodeId query, std::size_t k) const {
  if (query >= num_nodes_) throw Error("nn_query: node " + std::to_string(query) + " is not in the index");
  if (k == 0) throw Error("nn_query: k must be >= 1");
}

namespace {
std::vector<ScoredCandidate> top_k(std::vector<ScoredCandidate> all, std::size_t k) {
  const auto better = [](const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.node < b.node;
  };
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
  all.resize(k);
  return all;
}
}  // namespace

std::vector<ScoredCandidate> NnIndex::query(NodeId query, std::size_t k, int threads) const {
  check_query(query, k);
  std::vector<ScoredCandidate> all(num_nodes_);
  const auto n = static_cast<std::ptrdiff_t>(num_nodes_);
#pragma omp parallel for schedule(static) num_threads(resolve_threads(threads)) if (threads != 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto v = static_cast<NodeId>(i);
    all[static_cast<std::size_t>(i)] = {v, similarity(query, v)};
  }
  all.erase(all.begin() + query);
  return top_k(std::move(all), k);
}

std::vector<ScoredCandidate> NnIndex::query_serial(NodeId query, std::size_t k) const {
  check_query(query, k);
  std::vector<ScoredCandidate> all;
  all.reserve(num_nodes_);
  for (NodeId v = 0; v < num_nodes_; ++v) {
    if (v != query) all.push_back({v, similarity(query, v)});
  }
  return top_k(std::move(all), k);
}

// -------------------------------------------------------------- BloomFilter

double bloom_false_positive_rate(std::size_t bits, std::size_t hashes, std::size_t items) {
  const double k = static_cast<double>(hashes);
  return std::pow(1.0 - std::exp(-k * static_cast<double>(items) / static_cast<double>(bits)), k);
}

BloomFilter::BloomFilter(std::size_t bits, std::size_t hashes, std::uint64_t seed1, std::uint64_t seed2)
    : bits_(bits), hashes_(hashes), seed1_(seed1), seed2_(seed2), words_((bits + 63) / 64, 0) {
  if (bits == 0 || hashes == 0) throw Error("bloom filter: bits and hash count must be positive");
}

BloomFilter BloomFilter::for_capacity(std::size_t expected_items, double bits_per_item) {
  const std::size_t n = std::max<std::size_t>(1, expected_items);
  const auto m = static_cast<std::size_t>(std::ceil(bits_per_item * static_cast<double>(n)));
  const auto k = static_cast<std::size_t>(
      std::max(1.0, std::round(static_cast<double>(m) / static_cast<double>(n) * std::log(2.0))));
  return BloomFilter(m, k);
}

std::uint64_t BloomFilter::probe(std::uint64_t item, std::size_t i) const {
  const std::uint64_t h1 = splitmix64(item ^ seed1_);
  const std::uint64_t h2 = splitmix64(item ^ seed2_) | 1ULL;
  return (h1 + static_cast<std::uint64_t>(i) * h2) % bits_;
}

void BloomFilter::insert(std::uint64_t item) {
  for (std::size_t i = 0; i < hashes_; ++i) {
    const std::uint64_t b = probe(item, i);
    words_[b / 64] |= 1ULL << (b % 64);
  }
  ++inserted_;
}

bool BloomFilter::contains(std::uint64_t item) const {
  if (bits_ == 0) return false;
  for (std::size_t i = 0; i < hashes_; ++i) {
    const std::uint64_t b = probe(item, i);
    if ((words_[b / 64] & (1ULL << (b % 64))) == 0) return false;
  }
  return true;
}

double BloomFilter::expected_false_positive_rate() const {
  return bloom_false_positive_rate(bits_, hashes_, inserted_);
}

namespace {
constexpr char kBloomMagic[8] = {'H', 'E', 'T', 'B', 'L', 'M', '0', '1'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("bloom snapshot: truncated");
  return v;
}
}  // namespace

void BloomFilter::write(std::ostream& out) const {
  out.write(kBloomMagic, sizeof(kBloomMagic));
  put<std::uint64_t>(out, bits_);
  put<std::uint64_t>(out, hashes_);
  put<std::uint64_t>(out, seed1_);
  put<std::uint64_t>(out, seed2_);
  put<std::uint64_t>(out, inserted_);
  out.write(reinterpret_cast<const char*>(words_.data()), static_cast<std::streamsize>(words_.size() * 8));
}

BloomFilter BloomFilter::read(std::istream& in) {
  char magic[sizeof(kBloomMagic)];
  if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + sizeof(magic), kBloomMagic)) {
    throw FormatError("bloom snapshot: bad header");
  }
  const auto m = get<std::uint64_t>(in);
  const auto k = get<std::uint64_t>(in);
  const auto s1 = get<std::uint64_t>(in);
  const auto s2 = get<std::uint64_t>(in);
  BloomFilter f(m, k, s1, s2);
  f.inserted_ = get<std::uint64_t>(in);
  if (!in.read(reinterpret_cast<char*>(f.words_.data()), static_cast<std::streamsize>(f.words_.size() * 8))) {
    throw FormatError("bloom snapshot: truncated");
  }
  return f;
}

// -------------------------------------------------------------- Recommender

Recommender::Recommender(const MultiGraph& graph, TypeIndex friend_type, const EmbeddingTable& index_table,
                         const FeatureAssembler& assembler, const FusionModel& model, RecommenderConfig cfg)
    : graph_(graph),
      friend_type_(friend_type),
      index_(index_table),
      assembler_(assembler),
      model_(model),
      cfg_(cfg) {
  if (friend_type >= graph.num_types()) throw Error("recommender: undeclared friend type");
  if (index_table.num_nodes != graph.num_nodes() || assembler.num_nodes() != graph.num_nodes()) {
    throw Error("recommender: embeddings and graph cover different node sets");
  }
  if (cfg_.candidate_pool == 0) throw Error("recommender: candidate pool must be positive");
}

BloomFilter& Recommender::seen(NodeId user) {
  auto it = seen_.find(user);
  if (it == seen_.end()) {
    it = seen_.emplace(user, BloomFilter::for_capacity(cfg_.bloom_capacity, cfg_.bloom_bits_per_item)).first;
  }
  return it->second;
}

std::vector<Recommendation> Recommender::recommend(NodeId user, std::size_t k) {
  if (user >= index_.size()) throw Error("recommend: user " + std::to_string(user) + " is not in the index");
  BloomFilter& filter = seen(user);
  const auto candidates = index_.query(user, cfg_.candidate_pool, cfg_.threads);

  std::vector<double> x(assembler_.num_spaces() * assembler_.block_length());
  std::vector<ScoredCandidate> scored;
  for (const auto& c : candidates) {
    if (graph_.has_edge(user, c.node, friend_type_)) continue;
    if (filter.contains(c.node)) continue;
    assembler_.assemble_into(user, c.node, x);
    scored.push_back({c.node, predict(model_, x)});
  }
  sort_candidates(scored);
  if (scored.size() > k) scored.resize(k);

  std::vector<Recommendation> out;
  out.reserve(scored.size());
  for (const auto& s : scored) {
    filter.insert(s.node);
    out.push_back({s.node, s.score});
  }
  return out;
}

}  // namespace hetedge
