#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "hetedge/config.hpp"
#include "hetedge/pipeline.hpp"

namespace hetedge {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt";
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd = std::string(HETEDGE_CLI_PATH) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

// ------------------------------------------------------------------- config

PipelineConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(Config, ParsesKeysAndComments) {
  const auto cfg = parse("# comment\nwalk.strategy = hetero\n\nsgns.dim = 16\nseed = 9\nembed.spaces = friend,chat\n");
  EXPECT_EQ(cfg.walk.strategy, WalkStrategy::hetero);
  EXPECT_EQ(cfg.sgns.dim, 16u);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.spaces, (std::vector<std::string>{"friend", "chat"}));
}

TEST(Config, DefaultsFollowThePublishedSetup) {
  const PipelineConfig cfg;
  EXPECT_EQ(cfg.sgns.dim, 128u);
  EXPECT_EQ(cfg.sgns.window, 10u);
  EXPECT_EQ(cfg.walk.walks_per_node, 10u);
  EXPECT_EQ(cfg.walk.walk_length, 30u);
  EXPECT_EQ(cfg.train.learning_rate, 0.01);
  EXPECT_EQ(cfg.hidden, 256u);
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("seed = 1\nwalk.length 30\n"), 2u);
  EXPECT_EQ(error_line("seed = 1\n# x\nno.such.key = 3\n"), 3u);
  EXPECT_EQ(error_line("sgns.dim = many\n"), 1u);
  EXPECT_EQ(error_line("walk.strategy = zigzag\n"), 1u);
}

TEST(Config, InvalidValuesFailValidation) {
  EXPECT_THROW(parse("walk.p = 0\n"), Error);
  EXPECT_THROW(parse("train.batch_size = 0\n"), Error);
}

TEST(Config, WriteParseRoundTrip) {
  auto cfg = parse("walk.strategy = uniformbias\nfeatures.combiner = hadamard\ntrain.model = logreg\nseed = 77\n");
  std::ostringstream a;
  write_config(a, cfg);
  std::ostringstream b;
  write_config(b, parse(a.str()));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Config, RelativePathsResolveAgainstConfigDirectory) {
  const fs::path dir = fs::path(::testing::TempDir()) / "hetedge_cfg";
  fs::create_directories(dir);
  std::ofstream(dir / "c.txt") << "paths.edges = e.tsv\npaths.workdir = out\n";
  const auto cfg = load_config_file((dir / "c.txt").string());
  EXPECT_EQ(fs::path(cfg.edges_path), dir / "e.tsv");
  EXPECT_EQ(fs::path(cfg.workdir), dir / "out");
}

// ---------------------------------------------------------------------- CLI

class Cli : public ::testing::Test {
 protected:
  static fs::path root;

  static void TearDownTestSuite() { fs::remove_all(root); }

  static void SetUpTestSuite() {
    root = fs::path(::testing::TempDir()) / ("hetedge_cli_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    ASSERT_EQ(run_cli("synth --out " + (root / "bench").string() + " --nodes 300", root).code, 0);
    const auto r = run_cli("pipeline --config " + (root / "bench" / "config.txt").string() + " --threads 1", root);
    ASSERT_EQ(r.code, 0) << r.err;
    pipeline_stdout = r.out;
  }

  static std::string pipeline_stdout;
  static fs::path bench() { return root / "bench"; }
  static fs::path run_dir() { return bench() / "run"; }
};
fs::path Cli::root;
std::string Cli::pipeline_stdout;

TEST_F(Cli, PipelineReportsAucAndPrecision) {
  EXPECT_NE(pipeline_stdout.find("auc = "), std::string::npos);
  EXPECT_NE(pipeline_stdout.find("p_at_5 = "), std::string::npos);
  std::ifstream in(run_dir() / artifact::kMetrics);
  const auto m = read_metrics(in);
  for (const char* key : {"auc", "p_at_5", "rec_p_at_5", "test_pairs", "model", "combiner", "strategy"}) {
    EXPECT_TRUE(m.contains(key)) << key;
  }
  const double a = std::stod(m.at("auc"));
  EXPECT_GE(a, 0.0);
  EXPECT_LE(a, 1.0);
}

TEST_F(Cli, EveryArtifactIsVersioned) {
  EXPECT_EQ(slurp(run_dir() / artifact::kGraph).rfind("HETEDGE-GRAPH v1\n", 0), 0u);
  EXPECT_EQ(slurp(run_dir() / artifact::corpus("friend")).rfind("# HETEDGE-CORPUS v1", 0), 0u);
  EXPECT_EQ(slurp(run_dir() / artifact::kTrainFeatures).rfind("HETEDGE-FEAT v1\n", 0), 0u);
  EXPECT_EQ(slurp(run_dir() / artifact::kModel).rfind("HETEDGE-MODEL v1\n", 0), 0u);
  EXPECT_EQ(slurp(run_dir() / artifact::embeddings_meta("chat")).rfind("HETEDGE-EMB v1\n", 0), 0u);
}

TEST_F(Cli, StagesOneByOneMatchPipeline) {
  const fs::path wd = root / "stages";
  const std::string base = "--config " + (bench() / "config.txt").string() + " --threads 1 --workdir " + wd.string();
  for (const char* stage : {"ingest", "walk", "embed", "features", "train", "eval", "recommend"}) {
    const auto r = run_cli(std::string(stage) + " " + base, root);
    ASSERT_EQ(r.code, 0) << stage << ": " << r.err;
  }
  for (const auto& entry : fs::directory_iterator(run_dir())) {
    const auto name = entry.path().filename();
    EXPECT_EQ(slurp(wd / name), slurp(entry.path())) << name;
  }
}

TEST_F(Cli, RecommendPrecisionMatchesOfflineMetric) {
  std::ifstream rec(run_dir() / artifact::kRecommendations);
  std::map<std::string, std::vector<std::string>> lists;
  std::string user, cand;
  std::size_t rank = 0;
  double prob = 0.0;
  while (rec >> user >> rank >> cand >> prob) lists[user].push_back(cand);

  std::ifstream post(bench() / "post_edges.tsv");
  std::map<std::string, std::set<std::string>> truth;
  std::string line;
  while (std::getline(post, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string a, b;
    is >> a >> b;
    truth[a].insert(b);
    truth[b].insert(a);
  }

  std::map<std::string, NodeId> ids;
  auto id = [&](const std::string& s) { return ids.emplace(s, static_cast<NodeId>(ids.size())).first->second; };
  std::vector<UserRanking> ranked;
  TruthSets truth_ids;
  for (const auto& [u, friends] : truth) {
    UserRanking r{id(u), {}};
    for (const auto& c : lists[u]) r.candidates.push_back({id(c), 0.0});
    ranked.push_back(std::move(r));
    for (const auto& f : friends) truth_ids[id(u)].insert(id(f));
  }
  std::ifstream in(run_dir() / artifact::kMetrics);
  const auto m = read_metrics(in);
  EXPECT_EQ(std::stoul(m.at("rec_users")), ranked.size());
  EXPECT_EQ(format_double(precision_at_k(ranked, truth_ids, 5)), m.at("rec_p_at_5"));
}

TEST_F(Cli, MissingArtifactNamesStage) {
  const fs::path wd = root / "empty";
  const auto r = run_cli("walk --config " + (bench() / "config.txt").string() + " --workdir " + wd.string(), root);
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("walk: "), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("missing input artifact"), std::string::npos) << r.err;
}

TEST_F(Cli, SingleClassPredictionsFailEval) {
  std::ofstream(root / "one_class.txt") << "a b 1 0.9\nc d 1 0.2\n";
  const auto r = run_cli("eval --predictions " + (root / "one_class.txt").string(), root);
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("requires both positive and negative labels"), std::string::npos) << r.err;
}

TEST_F(Cli, PredictionsFileEvaluates) {
  const auto r = run_cli("eval --predictions " + (run_dir() / artifact::kPredictions).string(), root);
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(run_dir() / artifact::kMetrics);
  const auto m = read_metrics(in);
  EXPECT_NE(r.out.find("auc = " + m.at("auc")), std::string::npos) << r.out;
}

TEST_F(Cli, BadConfigExitsWithLineNumber) {
  std::ofstream(root / "bad.txt") << "seed = 1\n\nwalk.length thirty\n";
  const auto r = run_cli("ingest --config " + (root / "bad.txt").string(), root);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST_F(Cli, ReservedSignalTypeRejected) {
  const auto r = run_cli("synth --out " + (root / "bad_synth").string() + " --signal-type friend", root);
  EXPECT_NE(r.code, 0);
}

}  // namespace
}  // namespace hetedge
