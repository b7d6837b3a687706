#include "hetedge/walks.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hetedge/parallel.hpp"

namespace hetedge {

std::string_view to_string(WalkStrategy s) noexcept {
  switch (s) {
    case WalkStrategy::uniform: return "uniform";
    case WalkStrategy::node2vec: return "node2vec";
    case WalkStrategy::hetero: return "hetero";
    case WalkStrategy::uniformbias: return "uniformbias";
  }
  return "uniform";
}

WalkStrategy parse_walk_strategy(std::string_view name) {
  if (name == "uniform" || name == "deepwalk") return WalkStrategy::uniform;
  if (name == "node2vec") return WalkStrategy::node2vec;
  if (name == "hetero") return WalkStrategy::hetero;
  if (name == "uniformbias") return WalkStrategy::uniformbias;
  throw Error("unknown walk strategy '" + std::string(name) + "'");
}

void WalkConfig::validate() const {
  if (walk_length < 1) throw Error("walk config: walk_length must be >= 1");
  if (!(p > 0.0) || !(q > 0.0)) throw Error("walk config: p and q must be positive");
}

std::size_t WalkCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& w : walks) n += w.size();
  return n;
}

namespace {

std::size_t uniform_index(std::size_t n, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

double node2vec_weight(const HomogeneousGraph& g, NodeId prev, NodeId x, double inv_p, double inv_q) {
  if (x == prev) return inv_p;
  if (g.has_edge(prev, x)) return 1.0;
  return inv_q;
}

template <typename Step>
Walk run_walk(NodeId start, std::size_t length, Step&& step) {
  Walk walk;
  walk.reserve(length);
  walk.push_back(start);
  while (walk.size() < length) {
    const NodeId prev = walk.size() >= 2 ? walk[walk.size() - 2] : kNoNode;
    const NodeId next = step(prev, walk.back());
    if (next == kNoNode) break;
    walk.push_back(next);
  }
  return walk;
}

}  // namespace

NodeId uniform_step(const HomogeneousGraph& g, NodeId cur, Rng& rng) {
  auto adj = g.adj(cur);
  if (adj.empty()) return kNoNode;
  return adj[uniform_index(adj.size(), rng)];
}

NodeId node2vec_step(const HomogeneousGraph& g, NodeId prev, NodeId cur, double p, double q, Rng& rng) {
  if (prev == kNoNode) return uniform_step(g, cur, rng);
  auto adj = g.adj(cur);
  if (adj.empty()) return kNoNode;
  const double inv_p = 1.0 / p;
  const double inv_q = 1.0 / q;
  double total = 0.0;
  for (NodeId x : adj) total += node2vec_weight(g, prev, x, inv_p, inv_q);
  double r = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (NodeId x : adj) {
    r -= node2vec_weight(g, prev, x, inv_p, inv_q);
    if (r < 0.0) return x;
  }
  return adj.back();  // rounding at the top end
}

NodeId hetero_step(const MultiGraph& g, NodeId cur, Rng& rng) {
  const std::size_t total = g.degree(cur);
  if (total == 0) return kNoNode;
  std::size_t r = uniform_index(total, rng);
  for (TypeIndex t = 0; t < g.num_types(); ++t) {
    auto adj = g.adj(cur, t);
    if (r < adj.size()) return adj[r];
    r -= adj.size();
  }
  return kNoNode;  // unreachable
}

NodeId uniformbias_step(const MultiGraph& g, NodeId cur, Rng& rng) {
  std::size_t present = 0;
  for (TypeIndex t = 0; t < g.num_types(); ++t) present += g.degree(cur, t) > 0 ? 1 : 0;
  if (present == 0) return kNoNode;
  std::size_t pick = uniform_index(present, rng);
  for (TypeIndex t = 0; t < g.num_types(); ++t) {
    auto adj = g.adj(cur, t);
    if (adj.empty()) continue;
    if (pick == 0) return adj[uniform_index(adj.size(), rng)];
    --pick;
  }
  return kNoNode;  // unreachable
}

Walk uniform_walk(const HomogeneousGraph& g, NodeId start, std::size_t length, Rng& rng) {
  return run_walk(start, length, [&](NodeId, NodeId cur) { return uniform_step(g, cur, rng); });
}

Walk node2vec_walk(const HomogeneousGraph& g, NodeId start, std::size_t length, double p, double q, Rng& rng) {
  return run_walk(start, length, [&](NodeId prev, NodeId cur) { return node2vec_step(g, prev, cur, p, q, rng); });
}

Walk hetero_walk(const MultiGraph& g, NodeId start, std::size_t length, Rng& rng) {
  return run_walk(start, length, [&](NodeId, NodeId cur) { return hetero_step(g, cur, rng); });
}

Walk uniformbias_walk(const MultiGraph& g, NodeId start, std::size_t length, Rng& rng) {
  return run_walk(start, length, [&](NodeId, NodeId cur) { return uniformbias_step(g, cur, rng); });
}

// ----------------------------------------------------------- corpus builder

namespace {

constexpr std::uint64_t kPermStream = 0x7065726dULL;  // "perm"

/// Start-node order for pass `pass`; each pass visits every node once in a
/// seed-derived shuffled order.
std::vector<NodeId> pass_order(std::size_t n, std::uint64_t seed, std::size_t pass) {
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  Rng rng(derive_seed(seed, kPermStream, pass));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

template <typename WalkFn>
WalkCorpus build_corpus(std::size_t n, const WalkConfig& cfg, int threads, bool parallel, WalkFn&& walk_fn) {
  cfg.validate();
  WalkCorpus corpus;
  corpus.strategy = cfg.strategy;
  corpus.seed = cfg.seed;
  corpus.num_nodes = n;
  corpus.walks.resize(n * cfg.walks_per_node);

  for (std::size_t pass = 0; pass < cfg.walks_per_node; ++pass) {
    const auto order = pass_order(n, cfg.seed, pass);
    Walk* out = corpus.walks.data() + pass * n;
    const auto count = static_cast<std::ptrdiff_t>(n);
    if (parallel) {
#ifdef _OPENMP
      const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 64) num_threads(nthreads)
#else
      (void)threads;
#endif
      for (std::ptrdiff_t i = 0; i < count; ++i) {
        const NodeId start = order[static_cast<std::size_t>(i)];
        Rng rng(derive_seed(cfg.seed, start, pass));
        out[i] = walk_fn(start, rng);
      }
    } else {
      for (std::ptrdiff_t i = 0; i < count; ++i) {
        const NodeId start = order[static_cast<std::size_t>(i)];
        Rng rng(derive_seed(cfg.seed, start, pass));
        out[i] = walk_fn(start, rng);
      }
    }
  }
  return corpus;
}

WalkCorpus corpus_for(const HomogeneousGraph& g, const WalkConfig& cfg, int threads, bool parallel) {
  if (walks_multigraph(cfg.strategy)) {
    throw Error("walk strategy '" + std::string(to_string(cfg.strategy)) + "' needs the full multi-graph");
  }
  const std::size_t len = cfg.walk_length;
  WalkCorpus c;
  if (cfg.strategy == WalkStrategy::uniform) {
    c = build_corpus(g.num_nodes(), cfg, threads, parallel,
                     [&](NodeId s, Rng& rng) { return uniform_walk(g, s, len, rng); });
  } else {
    c = build_corpus(g.num_nodes(), cfg, threads, parallel,
                     [&](NodeId s, Rng& rng) { return node2vec_walk(g, s, len, cfg.p, cfg.q, rng); });
  }
  c.space = g.type_name();
  std::uint64_t h = fnv1a(g.type_name());
  h = fnv1a({reinterpret_cast<const char*>(g.csr().offsets.data()), g.csr().offsets.size() * sizeof(std::size_t)}, h);
  h = fnv1a({reinterpret_cast<const char*>(g.csr().neighbors.data()), g.csr().neighbors.size() * sizeof(NodeId)}, h);
  c.graph_hash = h;
  return c;
}

WalkCorpus corpus_for(const MultiGraph& g, const WalkConfig& cfg, int threads, bool parallel) {
  if (!walks_multigraph(cfg.strategy)) {
    throw Error("walk strategy '" + std::string(to_string(cfg.strategy)) +
                "' runs on a homogeneous split; call split_by_type first");
  }
  const std::size_t len = cfg.walk_length;
  WalkCorpus c;
  if (cfg.strategy == WalkStrategy::hetero) {
    c = build_corpus(g.num_nodes(), cfg, threads, parallel,
                     [&](NodeId s, Rng& rng) { return hetero_walk(g, s, len, rng); });
  } else {
    c = build_corpus(g.num_nodes(), cfg, threads, parallel,
                     [&](NodeId s, Rng& rng) { return uniformbias_walk(g, s, len, rng); });
  }
  c.space = std::string(kMultiSpace);
  c.graph_hash = g.content_hash();
  return c;
}

}  // namespace

WalkCorpus generate_corpus(const HomogeneousGraph& g, const WalkConfig& cfg, int threads) {
  return corpus_for(g, cfg, threads, true);
}
WalkCorpus generate_corpus(const MultiGraph& g, const WalkConfig& cfg, int threads) {
  return corpus_for(g, cfg, threads, true);
}
WalkCorpus generate_corpus_serial(const HomogeneousGraph& g, const WalkConfig& cfg) {
  return corpus_for(g, cfg, 1, false);
}
WalkCorpus generate_corpus_serial(const MultiGraph& g, const WalkConfig& cfg) {
  return corpus_for(g, cfg, 1, false);
}

// ---------------------------------------------------------------------- I/O

namespace {
constexpr std::string_view kCorpusMagic = "# HETEDGE-CORPUS v1";
}

void write_corpus(std::ostream& out, const WalkCorpus& corpus, const LabelMap& labels) {
  out << kCorpusMagic << " strategy=" << to_string(corpus.strategy) << " seed=" << corpus.seed
      << " graph=" << hex64(corpus.graph_hash) << " space=" << corpus.space << " nodes=" << corpus.num_nodes
      << '\n';
  for (const auto& w : corpus.walks) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (i) out << ' ';
      out << labels.label(w[i]);
    }
    out << '\n';
  }
}

WalkCorpus read_corpus(std::istream& in, const LabelMap& labels) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kCorpusMagic, 0) != 0) {
    throw FormatError("corpus: missing or unsupported header (expected '" + std::string(kCorpusMagic) + "')");
  }
  WalkCorpus corpus;
  std::istringstream header(line.substr(kCorpusMagic.size()));
  std::string kv;
  while (header >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (key == "strategy") corpus.strategy = parse_walk_strategy(value);
    else if (key == "seed") corpus.seed = std::stoull(value);
    else if (key == "graph") corpus.graph_hash = std::stoull(value, nullptr, 16);
    else if (key == "space") corpus.space = value;
    else if (key == "nodes") corpus.num_nodes = std::stoull(value);
  }
  if (corpus.num_nodes != labels.size()) {
    throw FormatError("corpus: node count " + std::to_string(corpus.num_nodes) + " does not match graph (" +
                      std::to_string(labels.size()) + ")");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream is(line);
    Walk w;
    std::string tok;
    while (is >> tok) {
      auto id = labels.find(tok);
      if (!id) throw ParseError(lineno, "corpus: unknown node label '" + tok + "'");
      w.push_back(*id);
    }
    corpus.walks.push_back(std::move(w));
  }
  return corpus;
}

}  // namespace hetedge
