#include "hetedge/sgns.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "hetedge/parallel.hpp"

namespace hetedge {

void SgnsConfig::validate() const {
  if (dim < 1) throw Error("sgns config: dim must be >= 1");
  if (window < 1) throw Error("sgns config: window must be >= 1");
  if (negatives < 1) throw Error("sgns config: negatives must be >= 1");
  if (!(learning_rate > 0.0)) throw Error("sgns config: learning_rate must be positive");
}

// ------------------------------------------------------- NoiseDistribution

namespace {
std::vector<std::uint64_t> corpus_counts(const WalkCorpus& corpus) {
  std::vector<std::uint64_t> counts(corpus.num_nodes, 0);
  for (const auto& w : corpus.walks) {
    for (NodeId v : w) {
      if (v >= counts.size()) throw Error("corpus references node " + std::to_string(v) + " beyond num_nodes");
      ++counts[v];
    }
  }
  return counts;
}
}  // namespace

NoiseDistribution::NoiseDistribution(const WalkCorpus& corpus) : NoiseDistribution(corpus_counts(corpus)) {}

NoiseDistribution::NoiseDistribution(std::span<const std::uint64_t> counts) {
  prob_.resize(counts.size());
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    prob_[i] = std::pow(static_cast<double>(counts[i]), kPower);
    total += prob_[i];
  }
  if (total <= 0.0) throw Error("noise distribution: empty corpus");
  cdf_.resize(prob_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < prob_.size(); ++i) {
    prob_[i] /= total;
    acc += prob_[i];
    cdf_[i] = acc;
  }
}

NodeId NoiseDistribution::sample(Rng& rng) const {
  const double r = std::uniform_real_distribution<double>(0.0, cdf_.back())(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), r);
  if (it == cdf_.end()) --it;
  // Zero-probability ids share a cdf value with their predecessor and are never returned.
  return static_cast<NodeId>(it - cdf_.begin());
}

// ------------------------------------------------------------ EmbeddingTable

EmbeddingTable::EmbeddingTable(std::string space_, std::size_t n, std::size_t d)
    : space(std::move(space_)), num_nodes(n), dim(d), input(n * d, 0.0), context(n * d, 0.0), active(n, 0) {}

// ---------------------------------------------------------- pair objective

namespace {
double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
}  // namespace

double sgns_pair_loss(std::span<const double> center, std::span<const double> positive,
                      std::span<const std::span<const double>> negatives) {
  double loss = -log_sigmoid(dot(center, positive));
  for (auto n : negatives) loss -= log_sigmoid(-dot(center, n));
  return loss;
}

SgnsPairGradient sgns_pair_gradient(std::span<const double> center, std::span<const double> positive,
                                    std::span<const std::span<const double>> negatives) {
  const std::size_t d = center.size();
  SgnsPairGradient g;
  g.center.assign(d, 0.0);
  g.positive.assign(d, 0.0);
  const double gp = sigmoid(dot(center, positive)) - 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    g.center[i] += gp * positive[i];
    g.positive[i] = gp * center[i];
  }
  for (auto n : negatives) {
    const double gn = sigmoid(dot(center, n));
    std::vector<double> gv(d);
    for (std::size_t i = 0; i < d; ++i) {
      g.center[i] += gn * n[i];
      gv[i] = gn * center[i];
    }
    g.negatives.push_back(std::move(gv));
  }
  return g;
}

// ----------------------------------------------------------------- training

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974ULL;   // "init"
constexpr std::uint64_t kTrainStream = 0x74726eULL;   // "trn"

struct PairUpdater {
  EmbeddingTable& table;
  const NoiseDistribution& noise;
  const SgnsConfig& cfg;
  std::vector<double> grad;

  /// One SGD step on (center, context) with fresh negatives. Returns the
  /// pair loss before the update.
  double step(NodeId c, NodeId o, Rng& rng) {
    const std::size_t d = table.dim;
    double* u = table.input.data() + c * d;
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    const double lr = cfg.learning_rate;
    for (std::size_t k = 0; k <= cfg.negatives; ++k) {
      NodeId target = o;
      double label = 1.0;
      if (k > 0) {
        target = noise.sample(rng);
        if (target == o) continue;
        label = 0.0;
      }
      double* v = table.context.data() + target * d;
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += u[i] * v[i];
      loss -= label > 0.0 ? log_sigmoid(s) : log_sigmoid(-s);
      const double g = (label - sigmoid(s)) * lr;
      for (std::size_t i = 0; i < d; ++i) {
        grad[i] += g * v[i];
        v[i] += g * u[i];
      }
    }
    for (std::size_t i = 0; i < d; ++i) u[i] += grad[i];
    return loss;
  }
};

void check_finite(double loss, std::size_t epoch) {
  if (!std::isfinite(loss)) {
    throw DivergenceError("sgns: non-finite loss in epoch " + std::to_string(epoch) +
                          "; lower sgns.learning_rate");
  }
}

/// Trains on walks[begin, end); `on_pair` sees each pair's pre-update loss.
template <typename OnPair>
void train_walks(const WalkCorpus& corpus, std::size_t begin, std::size_t end, PairUpdater& up, Rng& rng,
                 std::size_t window, OnPair&& on_pair) {
  for (std::size_t wi = begin; wi < end; ++wi) {
    const Walk& w = corpus.walks[wi];
    const std::size_t len = w.size();
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t lo = i >= window ? i - window : 0;
      const std::size_t hi = std::min(len - 1, i + window);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        on_pair(w[i], w[j], up.step(w[i], w[j], rng));
      }
    }
  }
}

}  // namespace

EmbeddingTable train_sgns(const WalkCorpus& corpus, const SgnsConfig& cfg, int threads, SgnsTrace* trace) {
  cfg.validate();
  if (corpus.walks.empty()) throw Error("sgns: empty corpus");
  const NoiseDistribution noise(corpus);
  const std::size_t n = corpus.num_nodes;
  const std::size_t d = cfg.dim;

  EmbeddingTable table(corpus.space, n, d);
  {
    Rng rng(derive_seed(cfg.seed, kInitStream));
    std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(d), 0.5 / static_cast<double>(d));
    for (auto& x : table.input) x = init(rng);
  }

  if (trace) {
    trace->block_loss.clear();
    trace->epoch_first_block.clear();
  }

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (threads == 1) {
      Rng rng(derive_seed(cfg.seed, kTrainStream, epoch));
      PairUpdater up{table, noise, cfg, std::vector<double>(d)};
      double block_sum = 0.0;
      std::size_t block_count = 0;
      if (trace) trace->epoch_first_block.push_back(trace->block_loss.size());
      train_walks(corpus, 0, corpus.walks.size(), up, rng, cfg.window, [&](NodeId c, NodeId o, double loss) {
        table.active[c] = 1;
        table.active[o] = 1;
        block_sum += loss;
        if (++block_count == (trace ? trace->block_pairs : 4096)) {
          check_finite(block_sum, epoch);
          if (trace) trace->block_loss.push_back(block_sum / static_cast<double>(block_count));
          block_sum = 0.0;
          block_count = 0;
        }
      });
      check_finite(block_sum, epoch);
      if (trace && block_count > 0) trace->block_loss.push_back(block_sum / static_cast<double>(block_count));
      continue;
    }

    // Lock-free parallel SGD: overlapping row updates race (last write wins).
    bool diverged = false;
#ifdef _OPENMP
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel num_threads(nthreads) reduction(|| : diverged)
#endif
    {
#ifdef _OPENMP
      const auto tid = static_cast<std::size_t>(omp_get_thread_num());
      const auto nt = static_cast<std::size_t>(omp_get_num_threads());
#else
      const std::size_t tid = 0, nt = 1;
#endif
      const std::size_t total = corpus.walks.size();
      const std::size_t begin = total * tid / nt;
      const std::size_t end = total * (tid + 1) / nt;
      Rng rng(derive_seed(cfg.seed, kTrainStream ^ (tid + 1) << 32, epoch));
      PairUpdater up{table, noise, cfg, std::vector<double>(d)};
      double sum = 0.0;
      train_walks(corpus, begin, end, up, rng, cfg.window, [&](NodeId c, NodeId o, double loss) {
        table.active[c] = 1;
        table.active[o] = 1;
        sum += loss;
      });
      diverged = diverged || !std::isfinite(sum);
    }
    if (diverged) check_finite(std::numeric_limits<double>::quiet_NaN(), epoch);
  }
  return table;
}

// ------------------------------------------------------------------- cosine

CosineResult cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("cosine: length mismatch");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return {0.0, true};
  return {std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0), false};
}

CosineResult cosine(const EmbeddingTable& table, NodeId a, NodeId b) {
  if (a >= table.num_nodes || b >= table.num_nodes) throw std::out_of_range("cosine: node id out of range");
  return cosine(table.row(a), table.row(b));
}

// ---------------------------------------------------------------------- I/O

void write_embeddings(std::ostream& out, const EmbeddingTable& table, const LabelMap& labels) {
  if (labels.size() != table.num_nodes) throw Error("write_embeddings: label count does not match table");
  out << table.num_nodes << ' ' << table.dim << '\n';
  for (NodeId v = 0; v < table.num_nodes; ++v) {
    out << labels.label(v);
    for (double x : table.row(v)) out << ' ' << format_double(x);
    out << '\n';
  }
}

EmbeddingTable read_embeddings(std::istream& in, const LabelMap& labels, std::string space) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw FormatError("embeddings: empty input");
  std::istringstream header(line);
  std::size_t n = 0, d = 0;
  if (!(header >> n >> d) || d == 0) throw ParseError(lineno, "embeddings: expected header 'N d'");
  if (n != labels.size()) {
    throw FormatError("embeddings: " + std::to_string(n) + " rows but graph has " + std::to_string(labels.size()) +
                      " nodes");
  }
  EmbeddingTable table(std::move(space), n, d);
  std::vector<std::uint8_t> seen(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    if (!std::getline(in, line)) throw ParseError(lineno + 1, "embeddings: truncated file");
    ++lineno;
    std::string_view rest(line);
    const auto sp = rest.find(' ');
    if (sp == std::string_view::npos) throw ParseError(lineno, "embeddings: missing vector");
    auto id = labels.find(rest.substr(0, sp));
    if (!id) throw ParseError(lineno, "embeddings: unknown label '" + std::string(rest.substr(0, sp)) + "'");
    if (seen[*id]) throw ParseError(lineno, "embeddings: duplicate row");
    seen[*id] = 1;
    rest.remove_prefix(sp + 1);
    auto row = table.row(*id);
    const char* p = rest.data();
    const char* end = rest.data() + rest.size();
    for (std::size_t i = 0; i < d; ++i) {
      while (p < end && *p == ' ') ++p;
      auto [next, ec] = std::from_chars(p, end, row[i]);
      if (ec != std::errc{}) throw ParseError(lineno, "embeddings: bad number in column " + std::to_string(i + 1));
      p = next;
    }
    while (p < end && *p == ' ') ++p;
    if (p != end) throw ParseError(lineno, "embeddings: more than " + std::to_string(d) + " values");
  }
  std::fill(table.active.begin(), table.active.end(), 1);
  return table;
}

}  // namespace hetedge
