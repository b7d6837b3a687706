#include "hetedge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "hetedge/serving.hpp"
#include "hetedge/synth.hpp"

namespace hetedge {

namespace fs = std::filesystem;

// ------------------------------------------------------------ in-memory steps

WalkCorpus walk_space(const MultiGraph& g, const std::string& space, const PipelineConfig& cfg) {
  const WalkConfig wc = cfg.walk_for(space);
  if (walks_multigraph(wc.strategy)) return generate_corpus(g, wc, cfg.threads);
  return generate_corpus(split_by_type(g, space), wc, cfg.threads);
}

EmbeddingTable embed_corpus(const WalkCorpus& corpus, const PipelineConfig& cfg) {
  return train_sgns(corpus, cfg.sgns_for(corpus.space), cfg.threads);
}

std::vector<EmbeddingTable> embed_spaces(const MultiGraph& g, const PipelineConfig& cfg) {
  std::vector<EmbeddingTable> tables;
  for (const auto& space : cfg.resolved_spaces()) {
    WalkCorpus corpus = walk_space(g, space, cfg);
    corpus.graph_hash = g.content_hash();
    tables.push_back(embed_corpus(corpus, cfg));
  }
  return tables;
}

void mark_active(EmbeddingTable& table, const MultiGraph& g) {
  std::optional<TypeIndex> type;
  if (table.space != kMultiSpace) type = g.schema().index_of(table.space);
  table.active.assign(table.num_nodes, 0);
  for (NodeId v = 0; v < table.num_nodes; ++v) table.active[v] = g.degree(v, type) > 0 ? 1 : 0;
}

std::uint64_t embedding_provenance(const MultiGraph& g, std::span<const EmbeddingTable> tables) {
  std::uint64_t h = fnv1a(hex64(g.content_hash()));
  for (const auto& t : tables) {
    h = fnv1a(t.space, h);
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(t.input.data()), t.input.size() * sizeof(double)), h);
  }
  return h;
}

std::vector<LabeledPair> labeled_pairs(const MultiGraph& g, std::span<const NodePair> post_edges,
                                       const PipelineConfig& cfg) {
  const TypeIndex friend_type = g.schema().index_of(cfg.friend_type);
  Rng rng(cfg.split_seed());
  // Count distinct positives first so the ratio applies after deduplication.
  const TemporalSplit probe = temporal_split(g, friend_type, post_edges, 0, rng);
  const auto negatives =
      static_cast<std::size_t>(std::llround(cfg.negative_ratio * static_cast<double>(probe.positives.size())));
  return temporal_split(g, friend_type, post_edges, negatives, rng).labeled();
}

Dataset make_dataset(const MultiGraph& g, std::span<const EmbeddingTable> tables,
                     std::span<const NodePair> post_edges, const PipelineConfig& cfg) {
  Rng rng(derive_seed(cfg.split_seed(), 1));
  auto [train_pairs, test_pairs] = split_train_test(labeled_pairs(g, post_edges, cfg), cfg.test_fraction, rng);

  std::vector<const EmbeddingTable*> ptrs;
  for (const auto& t : tables) ptrs.push_back(&t);
  const FeatureAssembler assembler(ptrs, cfg.combiner, cfg.fallback);
  const std::uint64_t provenance = embedding_provenance(g, tables);

  Dataset d{build_features(assembler, train_pairs, cfg.threads), build_features(assembler, test_pairs, cfg.threads)};
  d.train.provenance = provenance;
  d.test.provenance = provenance;
  return d;
}

SavedModel fit_model(const FeatureSet& train, const PipelineConfig& cfg, TrainReport* report) {
  SavedModel m{train.spaces, train.block_sizes, train.combiner, train.provenance, LogRegModel{}};
  if (cfg.model == ModelKind::logreg) {
    m.model = train_logreg(train, cfg.train_for(), report);
  } else {
    m.model = train_mtn(train, cfg.train_for(), cfg.hidden, report);
  }
  return m;
}

namespace {

void check_layout(const SavedModel& model, const FeatureSet& fs) {
  if (model.spaces != fs.spaces || model.block_sizes != fs.block_sizes || model.combiner != fs.combiner) {
    throw Error("model was trained on a different feature layout");
  }
  if (model.provenance != fs.provenance) {
    throw Error("model provenance " + hex64(model.provenance) + " does not match features " + hex64(fs.provenance));
  }
}

}  // namespace

Evaluation evaluate(const SavedModel& model, const FeatureSet& test, int threads) {
  check_layout(model, test);
  Evaluation e;
  e.scores = predict_all(model.model, test, threads);
  const auto labels = test.labels();
  e.auc = auc(e.scores, labels);
  TruthSets truth;
  const auto ranked = rank_pairs_by_user(test.pairs, e.scores, &truth);
  e.p_at_5 = precision_at_k(ranked, truth, 5);
  return e;
}

BenchmarkResult run_in_memory(const MultiGraph& g, std::span<const NodePair> post_edges, const PipelineConfig& cfg) {
  const auto tables = embed_spaces(g, cfg);
  const Dataset d = make_dataset(g, tables, post_edges, cfg);
  const SavedModel m = fit_model(d.train, cfg);
  const Evaluation e = evaluate(m, d.test, cfg.threads);
  return {e.auc, e.p_at_5};
}

PipelineConfig synthetic_benchmark_config() {
  PipelineConfig c;
  c.walk.strategy = WalkStrategy::node2vec;
  c.walk.walks_per_node = 5;
  c.walk.walk_length = 20;
  c.sgns.dim = 32;
  c.sgns.window = 5;
  c.sgns.epochs = 1;
  c.sgns.learning_rate = 0.025;
  c.combiner = Combiner::concatenate;
  c.model = ModelKind::mtn;
  c.train.learning_rate = 0.05;
  c.train.batch_size = 32;
  c.train.epochs = 10;
  return c;
}

PipelineConfig synthetic_baseline_config() {
  PipelineConfig c = synthetic_benchmark_config();
  c.walk.strategy = WalkStrategy::uniform;
  c.spaces = {c.friend_type};
  c.combiner = Combiner::hadamard;
  c.model = ModelKind::logreg;
  return c;
}

// ------------------------------------------------------------- file stages

namespace artifact {
std::string corpus(const std::string& space) { return "corpus." + space + ".txt"; }
std::string embeddings(const std::string& space) { return "emb." + space + ".txt"; }
std::string embeddings_meta(const std::string& space) { return "emb." + space + ".meta"; }
}  // namespace artifact

namespace {

constexpr std::string_view kEmbMetaHeader = "HETEDGE-EMB v1";

fs::path workdir(const PipelineConfig& cfg) { return fs::path(cfg.workdir.empty() ? "." : cfg.workdir); }

std::ifstream open_input(const std::string& stage, const fs::path& path, std::ios::openmode mode = std::ios::in) {
  if (!fs::exists(path)) throw StageError(stage, "missing input artifact " + path.string());
  std::ifstream in(path, mode);
  if (!in) throw StageError(stage, "cannot read " + path.string());
  return in;
}

std::ofstream open_output(const std::string& stage, const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw StageError(stage, "cannot write " + path.string());
  return out;
}

void close_output(const std::string& stage, std::ofstream& out, const fs::path& path, std::ostream& log) {
  out.close();
  if (!out) throw StageError(stage, "write failed for " + path.string());
  log << stage << ": wrote " << path.string() << '\n';
}

/// Runs `body`, rethrowing any failure as a StageError for `stage`.
template <typename F>
auto in_stage(const std::string& stage, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

MultiGraph load_graph(const std::string& stage, const PipelineConfig& cfg) {
  auto in = open_input(stage, workdir(cfg) / artifact::kGraph);
  return read_graph(in);
}

std::vector<EmbeddingTable> load_tables(const std::string& stage, const PipelineConfig& cfg, const MultiGraph& g) {
  std::vector<EmbeddingTable> tables;
  const std::string graph_hex = hex64(g.content_hash());
  for (const auto& space : cfg.resolved_spaces()) {
    auto meta_in = open_input(stage, workdir(cfg) / artifact::embeddings_meta(space));
    std::string header, graph_field;
    std::getline(meta_in, header);
    std::getline(meta_in, graph_field);
    if (header != kEmbMetaHeader) throw StageError(stage, artifact::embeddings_meta(space) + ": unsupported version");
    if (graph_field != "graph = " + graph_hex) {
      throw StageError(stage, artifact::embeddings(space) + " was trained on a different graph");
    }
    auto in = open_input(stage, workdir(cfg) / artifact::embeddings(space));
    EmbeddingTable t = read_embeddings(in, g.labels(), space);
    mark_active(t, g);
    tables.push_back(std::move(t));
  }
  return tables;
}

std::vector<NodePair> load_post_edges(const std::string& stage, const PipelineConfig& cfg, const MultiGraph& g,
                                      std::ostream& log) {
  if (cfg.post_edges_path.empty()) throw StageError(stage, "paths.post_edges is not set");
  auto in = open_input(stage, cfg.post_edges_path);
  const auto raw = read_pair_list(in);
  const TypeIndex friend_type = g.schema().index_of(cfg.friend_type);
  std::vector<NodePair> out;
  std::size_t unknown = 0, existing = 0;
  for (const auto& [a, b] : raw) {
    const auto u = g.labels().find(a);
    const auto v = g.labels().find(b);
    if (!u || !v || *u == *v) {
      ++unknown;
      continue;
    }
    if (g.has_edge(*u, *v, friend_type)) {
      ++existing;
      continue;
    }
    out.emplace_back(*u, *v);
  }
  if (unknown + existing > 0) {
    log << stage << ": skipped " << unknown << " post-period pairs with unknown nodes or self-loops and " << existing
        << " already friends\n";
  }
  return out;
}

SavedModel load_model(const std::string& stage, const PipelineConfig& cfg) {
  auto in = open_input(stage, workdir(cfg) / artifact::kModel);
  return read_model(in);
}

FeatureSet load_features(const std::string& stage, const PipelineConfig& cfg, const char* name) {
  auto in = open_input(stage, workdir(cfg) / name, std::ios::in | std::ios::binary);
  return read_features(in);
}

}  // namespace

void stage_ingest(const PipelineConfig& cfg, std::ostream& log) {
  const std::string stage = "ingest";
  in_stage(stage, [&] {
    if (cfg.edges_path.empty()) throw StageError(stage, "paths.edges is not set");
    auto in = open_input(stage, cfg.edges_path);
    LoadResult r = load_edge_list(in, cfg.schema);
    for (const auto& rej : r.rejected) log << stage << ": line " << rej.line << " rejected: " << rej.reason << '\n';
    log << stage << ": " << r.graph.num_nodes() << " nodes, " << r.graph.total_edge_count() << " edges\n";
    const fs::path path = workdir(cfg) / artifact::kGraph;
    auto out = open_output(stage, path);
    write_graph(out, r.graph);
    close_output(stage, out, path, log);
  });
}

void stage_walk(const PipelineConfig& cfg, std::ostream& log) {
  const std::string stage = "walk";
  in_stage(stage, [&] {
    const MultiGraph g = load_graph(stage, cfg);
    for (const auto& space : cfg.resolved_spaces()) {
      WalkCorpus corpus = walk_space(g, space, cfg);
      corpus.graph_hash = g.content_hash();
      const fs::path path = workdir(cfg) / artifact::corpus(space);
      auto out = open_output(stage, path);
      write_corpus(out, corpus, g.labels());
      close_output(stage, out, path, log);
    }
  });
}

void stage_embed(const PipelineConfig& cfg, std::ostream& log) {
  const std::string stage = "embed";
  in_stage(stage, [&] {
    const MultiGraph g = load_graph(stage, cfg);
    for (const auto& space : cfg.resolved_spaces()) {
      auto in = open_input(stage, workdir(cfg) / artifact::corpus(space));
      const WalkCorpus corpus = read_corpus(in, g.labels());
      if (corpus.graph_hash != g.content_hash()) {
        throw StageError(stage, artifact::corpus(space) + " was generated from a different graph");
      }
      if (corpus.space != space) throw StageError(stage, artifact::corpus(space) + " holds walks over " + corpus.space);
      const EmbeddingTable table = embed_corpus(corpus, cfg);

      const fs::path path = workdir(cfg) / artifact::embeddings(space);
      auto out = open_output(stage, path);
      write_embeddings(out, table, g.labels());
      close_output(stage, out, path, log);

      const fs::path meta = workdir(cfg) / artifact::embeddings_meta(space);
      auto mout = open_output(stage, meta);
      mout << kEmbMetaHeader << '\n' << "graph = " << hex64(g.content_hash()) << '\n';
      close_output(stage, mout, meta, log);
    }
  });
}

void stage_features(const PipelineConfig& cfg, std::ostream& log) {
  const std::string stage = "features";
  in_stage(stage, [&] {
    const MultiGraph g = load_graph(stage, cfg);
    const auto tables = load_tables(stage, cfg, g);
    const auto post = load_post_edges(stage, cfg, g, log);
    const Dataset d = make_dataset(g, tables, post, cfg);
    for (const auto& [name, set] : {std::pair{artifact::kTrainFeatures, &d.train}, {artifact::kTestFeatures, &d.test}}) {
      const fs::path path = workdir(cfg) / name;
      auto out = open_output(stage, path, std::ios::out | std::ios::binary);
      write_features(out, *set);
      close_output(stage, out, path, log);
    }
    log << stage << ": " << d.train.rows() << " train pairs, " << d.test.rows() << " test pairs\n";
  });
}

void stage_train(const PipelineConfig& cfg, std::ostream& log) {
  const std::string stage = "train";
  in_stage(stage, [&] {
    const FeatureSet train = load_features(stage, cfg, artifact::kTrainFeatures);
    TrainReport report;
    const SavedModel m = fit_model(train, cfg, &report);
    if (!report.val_auc.empty()) {
      log << stage << ": best epoch " << report.best_epoch + 1 << ", validation AUC "
          << format_double(report.val_auc[report.best_epoch]) << '\n';
    }
    const fs::path path = workdir(cfg) / artifact::kModel;
    auto out = open_output(stage, path);
    write_model(out, m);
    close_output(stage, out, path, log);
  });
}

MetricsReport stage_eval(const PipelineConfig& cfg, std::ostream& log) {
  const std::string stage = "eval";
  return in_stage(stage, [&] {
    const SavedModel m = load_model(stage, cfg);
    const FeatureSet test = load_features(stage, cfg, artifact::kTestFeatures);
    const MultiGraph g = load_graph(stage, cfg);
    const Evaluation e = evaluate(m, test, cfg.threads);

    std::vector<Prediction> preds;
    preds.reserve(test.rows());
    for (std::size_t i = 0; i < test.rows(); ++i) {
      const auto& p = test.pairs[i];
      preds.push_back({g.labels().label(p.u), g.labels().label(p.v), p.label, e.scores[i]});
    }
    const fs::path ppath = workdir(cfg) / artifact::kPredictions;
    auto pout = open_output(stage, ppath);
    write_predictions(pout, preds);
    close_output(stage, pout, ppath, log);

    const auto labels = test.labels();
    MetricsReport report;
    report["auc"] = format_double(e.auc);
    report["p_at_5"] = format_double(e.p_at_5);
    report["test_pairs"] = std::to_string(test.rows());
    report["test_positives"] = std::to_string(std::count(labels.begin(), labels.end(), 1));
    report["model"] = std::holds_alternative<MultiTowerNet>(m.model) ? "mtn" : "logreg";
    report["combiner"] = std::string(to_string(m.combiner));
    report["strategy"] = std::string(to_string(cfg.walk.strategy));
    const fs::path mpath = workdir(cfg) / artifact::kMetrics;
    auto mout = open_output(stage, mpath);
    write_metrics(mout, report);
    close_output(stage, mout, mpath, log);
    return report;
  });
}

void stage_recommend(const PipelineConfig& cfg, std::ostream& log) {
  const std::string stage = "recommend";
  in_stage(stage, [&] {
    const MultiGraph g = load_graph(stage, cfg);
    const auto tables = load_tables(stage, cfg, g);
    const SavedModel m = load_model(stage, cfg);
    if (m.provenance != embedding_provenance(g, tables)) {
      throw StageError(stage, "model was trained on different embeddings");
    }
    const auto post = load_post_edges(stage, cfg, g, log);

    std::vector<const EmbeddingTable*> ptrs;
    for (const auto& t : tables) ptrs.push_back(&t);
    const FeatureAssembler assembler(ptrs, m.combiner, cfg.fallback);
    if (assembler.space_names() != m.spaces || assembler.block_sizes() != m.block_sizes) {
      throw StageError(stage, "model was trained on a different feature layout");
    }
    const std::string index_space = cfg.resolved_index_space();
    const auto it = std::find_if(tables.begin(), tables.end(), [&](const auto& t) { return t.space == index_space; });
    if (it == tables.end()) throw StageError(stage, "index space '" + index_space + "' has no embeddings");

    RecommenderConfig rc;
    rc.candidate_pool = cfg.rec_pool;
    rc.threads = cfg.threads;
    Recommender rec(g, g.schema().index_of(cfg.friend_type), *it, assembler, m.model, rc);

    TruthSets truth;
    for (const auto& [u, v] : post) {
      truth[u].insert(v);
      truth[v].insert(u);
    }
    std::vector<NodeId> users;
    for (const auto& [u, _] : truth) users.push_back(u);
    std::sort(users.begin(), users.end());
    if (cfg.rec_users > 0 && users.size() > cfg.rec_users) users.resize(cfg.rec_users);
    if (users.empty()) throw StageError(stage, "no users with post-period friendships");

    std::vector<UserRanking> rankings;
    const fs::path rpath = workdir(cfg) / artifact::kRecommendations;
    auto rout = open_output(stage, rpath);
    for (NodeId u : users) {
      UserRanking r{u, {}};
      std::size_t rank = 0;
      for (const auto& item : rec.recommend(u, cfg.rec_k)) {
        rout << g.labels().label(u) << ' ' << ++rank << ' ' << g.labels().label(item.node) << ' '
             << format_double(item.probability) << '\n';
        r.candidates.push_back({item.node, item.probability});
      }
      rankings.push_back(std::move(r));
    }
    close_output(stage, rout, rpath, log);

    const fs::path bpath = workdir(cfg) / artifact::kBlooms;
    auto bout = open_output(stage, bpath, std::ios::out | std::ios::binary);
    const std::uint64_t count = rec.filters().size();
    bout.write(reinterpret_cast<const char*>(&count), sizeof(count));
    for (const auto& [user, filter] : rec.filters()) {
      const std::uint32_t id = user;
      bout.write(reinterpret_cast<const char*>(&id), sizeof(id));
      filter.write(bout);
    }
    close_output(stage, bout, bpath, log);

    // Recommendation metrics join the eval report when one exists.
    const fs::path mpath = workdir(cfg) / artifact::kMetrics;
    MetricsReport report;
    if (fs::exists(mpath)) {
      std::ifstream min(mpath);
      report = read_metrics(min);
    }
    report["rec_users"] = std::to_string(users.size());
    report["rec_p_at_" + std::to_string(cfg.rec_k)] = format_double(precision_at_k(rankings, truth, cfg.rec_k));
    auto mout = open_output(stage, mpath);
    write_metrics(mout, report);
    close_output(stage, mout, mpath, log);
  });
}

MetricsReport run_pipeline(const PipelineConfig& cfg, std::ostream& log) {
  stage_ingest(cfg, log);
  stage_walk(cfg, log);
  stage_embed(cfg, log);
  stage_features(cfg, log);
  stage_train(cfg, log);
  stage_eval(cfg, log);
  stage_recommend(cfg, log);
  std::ifstream in(workdir(cfg) / artifact::kMetrics);
  return read_metrics(in);
}

MetricsReport eval_predictions_file(const fs::path& path) {
  const std::string stage = "eval";
  return in_stage(stage, [&] {
    auto in = open_input(stage, path);
    const auto preds = read_predictions(in);
    LabelMap ids;
    std::vector<LabeledPair> pairs;
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& p : preds) {
      pairs.push_back({ids.intern(p.u), ids.intern(p.v), p.label});
      scores.push_back(p.score);
      labels.push_back(p.label);
    }
    MetricsReport report;
    report["auc"] = format_double(auc(scores, labels));
    TruthSets truth;
    const auto ranked = rank_pairs_by_user(pairs, scores, &truth);
    report["p_at_5"] = format_double(precision_at_k(ranked, truth, 5));
    report["test_pairs"] = std::to_string(preds.size());
    return report;
  });
}

}  // namespace hetedge
