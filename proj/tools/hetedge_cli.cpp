// hetedge: friend-recommendation pipeline driver.
//
//   hetedge synth --out bench/            # planted benchmark + configs
//   hetedge pipeline --config bench/config.txt --threads 1
//   hetedge eval --predictions run/predictions.txt

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "hetedge/config.hpp"
#include "hetedge/pipeline.hpp"
#include "hetedge/synth.hpp"

namespace {

using namespace hetedge;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string strategy;
  std::string combiner;
  std::string model;
  std::string workdir;
};

PipelineConfig resolve(const Overrides& o) {
  PipelineConfig cfg = o.config_path.empty() ? PipelineConfig{} : load_config_file(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (!o.strategy.empty()) cfg.walk.strategy = parse_walk_strategy(o.strategy);
  if (!o.combiner.empty()) cfg.combiner = parse_combiner(o.combiner);
  if (!o.model.empty()) cfg.model = parse_model_kind(o.model);
  if (!o.workdir.empty()) cfg.workdir = o.workdir;
  cfg.walk.validate();
  return cfg;
}

void print_metrics(const MetricsReport& m) {
  for (const auto& key : {"auc", "p_at_5"}) {
    if (auto it = m.find(key); it != m.end()) std::cout << key << " = " << it->second << '\n';
  }
}

int write_synthetic(const std::filesystem::path& out, SynthConfig sc) {
  std::filesystem::create_directories(out);
  const SynthData data = generate_synthetic(sc);
  {
    std::ofstream f(out / "edges.tsv");
    f << "# synthetic pre-period edges: src\tdst\ttype\n";
    write_edge_list(f, data.pre_edges);
  }
  {
    std::ofstream f(out / "post_edges.tsv");
    f << "# synthetic post-period friendships: src\tdst\n";
    write_pair_list(f, data.post_friend_edges);
  }
  auto emit = [&](PipelineConfig cfg, const char* name, const char* workdir) {
    cfg.schema = EdgeSchema({"contact", "friend", sc.signal_type}, true);
    cfg.edges_path = "edges.tsv";
    cfg.post_edges_path = "post_edges.tsv";
    cfg.workdir = workdir;
    cfg.seed = sc.seed;
    std::ofstream f(out / name);
    write_config(f, cfg);
  };
  emit(synthetic_benchmark_config(), "config.txt", "run");
  emit(synthetic_baseline_config(), "baseline.txt", "run_baseline");
  std::cerr << "synth: " << sc.num_nodes << " nodes, " << data.pre_edges.size() << " pre-period edges, "
            << data.post_friend_edges.size() << " post-period friendships in " << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous edge embeddings for friend recommendation"};
  app.require_subcommand(1);

  Overrides o;
  app.add_option("--config", o.config_path, "Pipeline config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Global seed");
  app.add_option("--threads", o.threads, "Worker threads (1: deterministic)");
  app.add_option("--strategy", o.strategy, "uniform|node2vec|hetero|uniformbias");
  app.add_option("--combiner", o.combiner, "average|hadamard|concatenate");
  app.add_option("--model", o.model, "logreg|mtn");
  app.add_option("--workdir", o.workdir, "Artifact directory");

  const std::vector<std::pair<const char*, const char*>> stages = {
      {"ingest", "Parse the edge list into a graph snapshot"},
      {"walk", "Generate random-walk corpora"},
      {"embed", "Train skip-gram embeddings per space"},
      {"features", "Temporal split and pair features"},
      {"train", "Fit the fusion model"},
      {"eval", "Score held-out pairs; print AUC and P@5"},
      {"recommend", "Batch top-k recommendations"},
      {"pipeline", "Run every stage in order"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : stages) subs[name] = app.add_subcommand(name, help)->fallthrough();

  std::string predictions;
  subs["eval"]->add_option("--predictions", predictions, "Evaluate an existing predictions file instead");

  SynthConfig sc;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write the planted synthetic benchmark")->fallthrough();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--nodes", sc.num_nodes, "Node count");
  synth->add_option("--signal-type", sc.signal_type, "Edge type carrying the newcomer signal");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      if (o.seed) sc.seed = *o.seed;
      return write_synthetic(synth_out, sc);
    }
    if (subs["eval"]->parsed() && !predictions.empty()) {
      print_metrics(eval_predictions_file(predictions));
      return 0;
    }
    const PipelineConfig cfg = resolve(o);
    if (subs["ingest"]->parsed()) stage_ingest(cfg, std::cerr);
    if (subs["walk"]->parsed()) stage_walk(cfg, std::cerr);
    if (subs["embed"]->parsed()) stage_embed(cfg, std::cerr);
    if (subs["features"]->parsed()) stage_features(cfg, std::cerr);
    if (subs["train"]->parsed()) stage_train(cfg, std::cerr);
    if (subs["eval"]->parsed()) print_metrics(stage_eval(cfg, std::cerr));
    if (subs["recommend"]->parsed()) stage_recommend(cfg, std::cerr);
    if (subs["pipeline"]->parsed()) print_metrics(run_pipeline(cfg, std::cerr));
  } catch (const ParseError& e) {
    std::cerr << "error: config " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
