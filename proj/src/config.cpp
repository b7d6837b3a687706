#include "hetedge/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>

namespace hetedge {

std::string_view to_string(ModelKind m) noexcept { return m == ModelKind::mtn ? "mtn" : "logreg"; }

ModelKind parse_model_kind(std::string_view name) {
  if (name == "mtn") return ModelKind::mtn;
  if (name == "logreg") return ModelKind::logreg;
  throw Error("unknown model '" + std::string(name) + "' (expected logreg or mtn)");
}

std::vector<std::string> PipelineConfig::resolved_spaces() const {
  if (walks_multigraph(walk.strategy)) return {std::string(kMultiSpace)};
  if (spaces.empty()) return schema.names();
  for (const auto& s : spaces) schema.index_of(s);
  return spaces;
}

std::string PipelineConfig::resolved_index_space() const {
  if (!index_space.empty()) return index_space;
  return walks_multigraph(walk.strategy) ? std::string(kMultiSpace) : friend_type;
}

WalkConfig PipelineConfig::walk_for(const std::string& space) const {
  WalkConfig w = walk;
  w.seed = derive_seed(seed, fnv1a("walk:" + space));
  return w;
}

SgnsConfig PipelineConfig::sgns_for(const std::string& space) const {
  SgnsConfig s = sgns;
  s.seed = derive_seed(seed, fnv1a("sgns:" + space));
  return s;
}

TrainConfig PipelineConfig::train_for() const {
  TrainConfig t = train;
  t.seed = derive_seed(seed, fnv1a("train"));
  return t;
}

std::uint64_t PipelineConfig::split_seed() const { return derive_seed(seed, fnv1a("split")); }

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    std::string item = trim(std::string_view(v).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& v) {
  T out{};
  auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || end != v.data() + v.size()) throw Error("expected a number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("expected true/false, got '" + v + "'");
}

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"schema.types", [](auto& c, const auto& v) { c.schema = EdgeSchema(split_list(v), c.schema.closed()); }},
      {"schema.closed", [](auto& c, const auto& v) { c.schema = EdgeSchema(c.schema.names(), parse_bool(v)); }},
      {"schema.friend", [](auto& c, const auto& v) { c.friend_type = v; }},
      {"paths.edges", [](auto& c, const auto& v) { c.edges_path = v; }},
      {"paths.post_edges", [](auto& c, const auto& v) { c.post_edges_path = v; }},
      {"paths.workdir", [](auto& c, const auto& v) { c.workdir = v; }},
      {"walk.strategy", [](auto& c, const auto& v) { c.walk.strategy = parse_walk_strategy(v); }},
      {"walk.walks_per_node", [](auto& c, const auto& v) { c.walk.walks_per_node = parse_number<std::size_t>(v); }},
      {"walk.length", [](auto& c, const auto& v) { c.walk.walk_length = parse_number<std::size_t>(v); }},
      {"walk.p", [](auto& c, const auto& v) { c.walk.p = parse_number<double>(v); }},
      {"walk.q", [](auto& c, const auto& v) { c.walk.q = parse_number<double>(v); }},
      {"embed.spaces", [](auto& c, const auto& v) { c.spaces = split_list(v); }},
      {"sgns.dim", [](auto& c, const auto& v) { c.sgns.dim = parse_number<std::size_t>(v); }},
      {"sgns.window", [](auto& c, const auto& v) { c.sgns.window = parse_number<std::size_t>(v); }},
      {"sgns.negatives", [](auto& c, const auto& v) { c.sgns.negatives = parse_number<std::size_t>(v); }},
      {"sgns.learning_rate", [](auto& c, const auto& v) { c.sgns.learning_rate = parse_number<double>(v); }},
      {"sgns.epochs", [](auto& c, const auto& v) { c.sgns.epochs = parse_number<std::size_t>(v); }},
      {"features.combiner", [](auto& c, const auto& v) { c.combiner = parse_combiner(v); }},
      {"features.fallback", [](auto& c, const auto& v) { c.fallback = parse_fallback(v); }},
      {"train.model", [](auto& c, const auto& v) { c.model = parse_model_kind(v); }},
      {"train.learning_rate", [](auto& c, const auto& v) { c.train.learning_rate = parse_number<double>(v); }},
      {"train.batch_size", [](auto& c, const auto& v) { c.train.batch_size = parse_number<std::size_t>(v); }},
      {"train.epochs", [](auto& c, const auto& v) { c.train.epochs = parse_number<std::size_t>(v); }},
      {"train.validation_fraction",
       [](auto& c, const auto& v) { c.train.validation_fraction = parse_number<double>(v); }},
      {"train.hidden", [](auto& c, const auto& v) { c.hidden = parse_number<std::size_t>(v); }},
      {"eval.negative_ratio", [](auto& c, const auto& v) { c.negative_ratio = parse_number<double>(v); }},
      {"eval.test_fraction", [](auto& c, const auto& v) { c.test_fraction = parse_number<double>(v); }},
      {"recommend.k", [](auto& c, const auto& v) { c.rec_k = parse_number<std::size_t>(v); }},
      {"recommend.pool", [](auto& c, const auto& v) { c.rec_pool = parse_number<std::size_t>(v); }},
      {"recommend.users", [](auto& c, const auto& v) { c.rec_users = parse_number<std::size_t>(v); }},
      {"recommend.index_space", [](auto& c, const auto& v) { c.index_space = v; }},
      {"seed", [](auto& c, const auto& v) { c.seed = parse_number<std::uint64_t>(v); }},
      {"threads", [](auto& c, const auto& v) { c.threads = parse_number<int>(v); }},
  };
  return table;
}

}  // namespace

PipelineConfig parse_config(std::istream& in, PipelineConfig cfg) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) throw ParseError(lineno, "unknown config key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(lineno, key + ": " + e.what());
    }
  }
  cfg.walk.validate();
  cfg.sgns.validate();
  cfg.train.validate();
  return cfg;
}

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  PipelineConfig cfg = parse_config(in);
  // Relative paths are taken relative to the config file.
  const auto base = std::filesystem::path(path).parent_path();
  for (std::string* p : {&cfg.edges_path, &cfg.post_edges_path, &cfg.workdir}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
  return cfg;
}

void write_config(std::ostream& out, const PipelineConfig& c) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
  };
  out << "schema.types = " << join(c.schema.names()) << '\n'
      << "schema.closed = " << (c.schema.closed() ? "true" : "false") << '\n'
      << "schema.friend = " << c.friend_type << '\n'
      << "paths.edges = " << c.edges_path << '\n'
      << "paths.post_edges = " << c.post_edges_path << '\n'
      << "paths.workdir = " << c.workdir << '\n'
      << "walk.strategy = " << to_string(c.walk.strategy) << '\n'
      << "walk.walks_per_node = " << c.walk.walks_per_node << '\n'
      << "walk.length = " << c.walk.walk_length << '\n'
      << "walk.p = " << format_double(c.walk.p) << '\n'
      << "walk.q = " << format_double(c.walk.q) << '\n';
  if (!c.spaces.empty()) out << "embed.spaces = " << join(c.spaces) << '\n';
  out << "sgns.dim = " << c.sgns.dim << '\n'
      << "sgns.window = " << c.sgns.window << '\n'
      << "sgns.negatives = " << c.sgns.negatives << '\n'
      << "sgns.learning_rate = " << format_double(c.sgns.learning_rate) << '\n'
      << "sgns.epochs = " << c.sgns.epochs << '\n'
      << "features.combiner = " << to_string(c.combiner) << '\n'
      << "features.fallback = " << to_string(c.fallback) << '\n'
      << "train.model = " << to_string(c.model) << '\n'
      << "train.learning_rate = " << format_double(c.train.learning_rate) << '\n'
      << "train.batch_size = " << c.train.batch_size << '\n'
      << "train.epochs = " << c.train.epochs << '\n'
      << "train.validation_fraction = " << format_double(c.train.validation_fraction) << '\n'
      << "train.hidden = " << c.hidden << '\n'
      << "eval.negative_ratio = " << format_double(c.negative_ratio) << '\n'
      << "eval.test_fraction = " << format_double(c.test_fraction) << '\n'
      << "recommend.k = " << c.rec_k << '\n'
      << "recommend.pool = " << c.rec_pool << '\n'
      << "recommend.users = " << c.rec_users << '\n';
  if (!c.index_space.empty()) out << "recommend.index_space = " << c.index_space << '\n';
  out << "seed = " << c.seed << '\n' << "threads = " << c.threads << '\n';
}

}  // namespace hetedge
