#include "hetedge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_set>

namespace hetedge {

namespace {

std::uint64_t key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::string node_label(std::size_t i) { return "u" + std::to_string(i); }

/// floor(mean) draws plus one more with probability frac(mean).
std::size_t draw_count(double mean, Rng& rng) {
  const double whole = std::floor(mean);
  return static_cast<std::size_t>(whole) +
         (std::bernoulli_distribution(mean - whole)(rng) ? std::size_t{1} : std::size_t{0});
}

}  // namespace

SynthData generate_synthetic(const SynthConfig& cfg) {
  const std::size_t n = cfg.num_nodes;
  const std::size_t n_groups = cfg.communities * cfg.groups_per_community;
  if (cfg.signal_type == "friend" || cfg.signal_type == "contact") {
    throw Error("synthetic benchmark: signal type must differ from friend and contact");
  }
  if (n < 2 || n_groups == 0 || n < n_groups) throw Error("synthetic benchmark: need at least one node per group");

  Rng rng(derive_seed(cfg.seed, 0x73796e74ULL));  // "synt"
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SynthData data;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  data.group_of.assign(n, 0);
  std::vector<std::vector<std::size_t>> groups(n_groups);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t g = pos * n_groups / n;
    data.group_of[perm[pos]] = g;
    groups[g].push_back(perm[pos]);
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  const auto community = [&](std::size_t v) { return data.group_of[v] / cfg.groups_per_community; };

  std::vector<std::uint8_t> newcomer(n, 0);
  std::vector<std::size_t> established;
  for (std::size_t v = 0; v < n; ++v) {
    newcomer[v] = unit(rng) < cfg.newcomer_fraction ? 1 : 0;
    if (!newcomer[v]) established.push_back(v);
  }
  std::vector<std::vector<std::size_t>> community_members(cfg.communities);
  for (std::size_t v = 0; v < n; ++v) community_members[community(v)].push_back(v);

  std::unordered_set<std::uint64_t> friends, post;
  auto add = [&](std::size_t a, std::size_t b, std::string_view type) {
    if (a == b) return;
    data.pre_edges.push_back({node_label(a), node_label(b), std::string(type)});
    if (type == "friend") friends.insert(key(a, b));
  };

  std::vector<std::pair<std::size_t, std::size_t>> post_candidates;
  for (const auto& members : groups) {
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        const std::size_t a = members[i], b = members[j];
        bool is_friend = false;
        if (!newcomer[a] && !newcomer[b] && unit(rng) < cfg.friend_in_group) {
          add(a, b, "friend");
          is_friend = true;
        }
        if (unit(rng) < cfg.chat_in_group) add(a, b, cfg.signal_type);
        if (unit(rng) < cfg.contact_in_group) add(a, b, "contact");
        if (!is_friend && unit(rng) < cfg.post_in_group) post_candidates.emplace_back(a, b);
      }
    }
  }

  if (!established.empty()) {
    std::uniform_int_distribution<std::size_t> pick_est(0, established.size() - 1);
    for (std::size_t v : established) {
      for (std::size_t k = draw_count(cfg.friend_noise, rng); k > 0; --k) add(v, established[pick_est(rng)], "friend");
    }
  }
  std::uniform_int_distribution<std::size_t> pick_any(0, n - 1);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t k = draw_count(cfg.chat_noise, rng); k > 0; --k) add(v, pick_any(rng), cfg.signal_type);
    const auto& members = community_members[community(v)];
    std::uniform_int_distribution<std::size_t> pick_comm(0, members.size() - 1);
    for (std::size_t k = draw_count(cfg.contact_in_community, rng); k > 0; --k) add(v, members[pick_comm(rng)], "contact");
  }

  for (const auto& [a, b] : post_candidates) {
    if (friends.contains(key(a, b))) continue;  // noise edges may have claimed the pair
    if (post.insert(key(a, b)).second) data.post_friend_edges.emplace_back(node_label(a), node_label(b));
  }
  const auto extra = static_cast<std::size_t>(std::llround(cfg.post_noise * static_cast<double>(post.size())));
  for (std::size_t added = 0, tries = 0; added < extra && tries < 100 * (extra + 1); ++tries) {
    const std::size_t a = pick_any(rng), b = pick_any(rng);
    if (a == b || friends.contains(key(a, b)) || !post.insert(key(a, b)).second) continue;
    data.post_friend_edges.emplace_back(node_label(a), node_label(b));
    ++added;
  }
  return data;
}

MultiGraph build_graph(const SynthData& data, const EdgeSchema& schema) {
  MultiGraphBuilder b(schema);
  // Intern every node so isolated ones keep a dense id.
  for (std::size_t v = 0; v < data.group_of.size(); ++v) b.add_node(node_label(v));
  for (const auto& e : data.pre_edges) b.add_edge(e.src, e.dst, e.type);
  return b.build();
}

std::vector<std::pair<NodeId, NodeId>> resolve_post_edges(const SynthData& data, const MultiGraph& g) {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(data.post_friend_edges.size());
  for (const auto& [a, b] : data.post_friend_edges) out.emplace_back(g.labels().id(a), g.labels().id(b));
  return out;
}

void write_edge_list(std::ostream& out, const std::vector<TypedEdge>& edges) {
  for (const auto& e : edges) out << e.src << '\t' << e.dst << '\t' << e.type << '\n';
}

void write_pair_list(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& pairs) {
  for (const auto& [a, b] : pairs) out << a << '\t' << b << '\n';
}

std::vector<std::pair<std::string, std::string>> read_pair_list(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto t1 = line.find('\t');
    if (t1 == std::string::npos || t1 == 0) throw ParseError(lineno, "expected 'src<TAB>dst'");
    const auto t2 = line.find('\t', t1 + 1);
    std::string dst = line.substr(t1 + 1, t2 == std::string::npos ? std::string::npos : t2 - t1 - 1);
    if (dst.empty()) throw ParseError(lineno, "expected 'src<TAB>dst'");
    out.emplace_back(line.substr(0, t1), std::move(dst));
  }
  return out;
}

}  // namespace hetedge
