// Copyright 2026 The Modbot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MODBOT_DESIGN_GRAPH_HPP_
#define MODBOT_DESIGN_GRAPH_HPP_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace modbot {

class DesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Module types a robot can be assembled from. A robot is one body plus up
// to six limb modules mounted at fixed ports.
enum class ModuleKind : uint8_t { kBody, kLeg, kWheel, kNone };

struct KindInfo {
  int dof;        // actuated joints (action dims)
  int state_dim;  // simulator state channels
  int obs_dim;    // observation channels exposed to the policy
};

// Body: pose/velocity state (10), IMU-style observation (5), no actions.
// Leg: 3 joints, angles+rates state (6), fully observed.
// Wheel: steer + drive, state (4); the unbounded drive angle is dropped
// from observations, leaving (steer, steer rate, drive rate).
constexpr KindInfo kind_info(ModuleKind k) {
  switch (k) {
    case ModuleKind::kBody:
      return {0, 10, 5};
    case ModuleKind::kLeg:
      return {3, 6, 6};
    case ModuleKind::kWheel:
      return {2, 4, 3};
    case ModuleKind::kNone:
      return {0, 0, 0};
  }
  return {0, 0, 0};
}

const char* kind_name(ModuleKind k);

// Fixed body-frame mounting points. Ports 0..2 run front-to-rear on the
// left side, 3..5 mirror them on the right.
struct Port {
  int index;
  double x;     // longitudinal offset [m], + forward
  double y;     // lateral offset [m], + left
  double side;  // +1 left, -1 right
};

constexpr int kNumPorts = 6;

constexpr Port port(int i) {
  constexpr double xs[3] = {0.3, 0.0, -0.3};
  return {i, xs[i % 3], i < 3 ? 0.2 : -0.2, i < 3 ? 1.0 : -1.0};
}

struct GraphNode {
  int slot;  // -1 for the body, otherwise port index
  ModuleKind kind;
};

// Directed edge with a 7-dim feature: port one-hot followed by the side
// sign of the module endpoint. Both directions of a body<->module pair
// carry the module's port feature, so a network can condition behavior on
// where a module is mounted.
struct GraphEdge {
  int src;
  int dst;
  std::array<double, 7> feature;
};

// A robot design and everything derived from it: graph connectivity and
// the per-design state/observation/action vector layouts. Immutable after
// construction; safe to share across threads.
class Design {
 public:
  // Accepts an alias (hex6l, car4w, llw, lnw) or a pattern "XYZ|XYZ" with
  // X,Y,Z in {L,W,N}: left side front-to-rear, then right side.
  static Design parse(const std::string& spec);

  static bool is_known_alias(const std::string& s);

  const std::string& name() const { return name_; }
  const std::string& pattern() const { return pattern_; }
  const std::array<ModuleKind, kNumPorts>& slots() const { return slots_; }
  ModuleKind slot(int i) const { return slots_.at(i); }

  // Node 0 is the body; module nodes follow in ascending slot order.
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  int state_dim() const { return state_dim_; }
  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }

  // Offsets of node n's block within the state/obs/action vectors.
  int state_offset(int node) const { return state_off_[node]; }
  int obs_offset(int node) const { return obs_off_[node]; }
  int action_offset(int node) const { return act_off_[node]; }

  int node_for_slot(int slot) const { return node_of_slot_[slot]; }  // -1 if empty

  // Pattern with left and right sides exchanged ("LNW|LLW" -> "LLW|LNW").
  std::string mirrored_pattern() const;

 private:
  Design() = default;

  std::string name_;
  std::string pattern_;
  std::array<ModuleKind, kNumPorts> slots_{};
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<int> state_off_, obs_off_, act_off_;
  std::array<int, kNumPorts> node_of_slot_{};
  int state_dim_ = 0, obs_dim_ = 0, action_dim_ = 0;
};

struct Dims {
  int state_dim;
  int obs_dim;
  int action_dim;
};

inline Dims total_dims(const Design& d) {
  return {d.state_dim(), d.obs_dim(), d.action_dim()};
}

}  // namespace modbot

#endif  // MODBOT_DESIGN_GRAPH_HPP_
