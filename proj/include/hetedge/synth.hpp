#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hetedge/multigraph.hpp"

namespace hetedge {

/// Planted benchmark: two communities, each cut into small groups. Future
/// friendships form inside groups. Established users already have some
/// in-group friends; newcomers have none, so for them the in-group signal is
/// visible only through chat (and, more weakly, contact) edges.
struct SynthConfig {
  std::size_t num_nodes = 2000;
  std::size_t communities = 2;
  std::size_t groups_per_community = 20;
  double newcomer_fraction = 0.4;
  double friend_in_group = 0.12;    // per established in-group pair
  double friend_noise = 0.5;        // random extra friend edges per established node
  std::string signal_type = "chat";  // edge type carrying the newcomer signal
  double chat_in_group = 0.08;       // signal edges per in-group pair
  double chat_noise = 0.5;           // random signal edges per node
  double contact_in_group = 0.05;   // per in-group pair
  double contact_in_community = 6;  // random in-community contacts per node
  double post_in_group = 0.06;      // new friendship per in-group non-friend pair
  double post_noise = 0.1;          // fraction of extra out-of-group new friendships
  std::uint64_t seed = 1;
};

struct TypedEdge {
  std::string src;
  std::string dst;
  std::string type;
};

struct SynthData {
  std::vector<TypedEdge> pre_edges;
  std::vector<std::pair<std::string, std::string>> post_friend_edges;
  std::vector<std::size_t> group_of;  // by node index
};

SynthData generate_synthetic(const SynthConfig& cfg);

MultiGraph build_graph(const SynthData& data, const EdgeSchema& schema = EdgeSchema());
/// Post-period edges resolved against the graph's labels.
std::vector<std::pair<NodeId, NodeId>> resolve_post_edges(const SynthData& data, const MultiGraph& g);

void write_edge_list(std::ostream& out, const std::vector<TypedEdge>& edges);
/// `src<TAB>dst` per line.
void write_pair_list(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& pairs);
std::vector<std::pair<std::string, std::string>> read_pair_list(std::istream& in);

}  // namespace hetedge
