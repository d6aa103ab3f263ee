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

#ifndef MODBOT_NETS_HPP_
#define MODBOT_NETS_HPP_

#include <string>
#include <unordered_map>
#include <vector>

#include "modbot/design_graph.hpp"
#include "modbot/param_store.hpp"
#include "modbot/tape.hpp"

namespace modbot {

// Network sizes shared by the policy and the dynamics model. One set of
// per-module-type components is instantiated regardless of design, so a
// parameter vector applies to any robot assembled from the module set.
struct NetArch {
  int width = 64;    // node feature width
  int message = 32;  // message width
  int rounds = 2;    // message-passing rounds
  int hidden = 32;   // recurrent state width per node (policy only)

  void validate() const;
};

// log_std outputs are clamped to this range (straight-through gradient).
constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;

// The model's body input drops world x/y: orientation and velocity only.
constexpr int kModelBodyInput = 8;

int model_input_dim(ModuleKind k);

// Fresh parameter stores. Weights ~ U(+-sqrt(6/(fan_in+fan_out))), biases
// zero except the action head's log_std half, which starts at -1. Each
// tensor draws from an independent stream keyed by its name, so two stores
// from the same seed are bit-identical regardless of construction order.
ParamStore init_policy_params(const NetArch& arch, uint64_t seed);
ParamStore init_model_params(const NetArch& arch, uint64_t seed);

// Binds a ParamStore's tensors onto a tape on demand, remembering ids so a
// multi-step rollout references each parameter once. Gradient name order is
// the store's (sorted) order.
class NetBinding {
 public:
  NetBinding(Tape& tape, ParamStore& params, const NetArch& arch, bool trainable)
      : tape_(&tape), params_(&params), arch_(arch), trainable_(trainable) {}

  NodeId p(const std::string& name);
  Tape& tape() { return *tape_; }
  ParamStore& params() { return *params_; }
  const NetArch& arch() const { return arch_; }

  // (name, grad) pairs in sorted name order; empty spans for params the
  // backward pass never reached.
  std::vector<std::pair<std::string, std::span<const double>>> grads() const;

 private:
  Tape* tape_;
  ParamStore* params_;
  NetArch arch_;
  bool trainable_;
  std::unordered_map<std::string, NodeId> ids_;
};

// Per-(tape, design, batch) constants: edge features tiled to batch rows,
// and each node's incoming edges sorted by sender so message aggregation
// order is canonical (sum order independent of edge list order).
struct GraphCtx {
  const Design* design;
  int rows;
  std::vector<NodeId> edge_feature;               // per edge, [rows, 7]
  std::vector<std::vector<int>> incoming;         // per node: edge indices

  static GraphCtx make(Tape& tape, const Design& d, int rows);
};

struct PolicyOut {
  NodeId mean;                  // [rows, action_dim]
  NodeId log_std;               // [rows, action_dim], clamped
  std::vector<NodeId> hidden;   // per node, [rows, hidden]
};

// One control step of the policy: encode per-node observation slices, run
// message passing, advance each node's recurrent state, and read the
// action heads. Differentiable end to end; deterministic.
PolicyOut policy_forward(NetBinding& net, const GraphCtx& g, NodeId obs,
                         const std::vector<NodeId>& hidden);

// One step of the dynamics model on normalized inputs: returns the
// normalized state-delta prediction [rows, state_dim]. No recurrence.
NodeId model_forward(NetBinding& net, const GraphCtx& g, NodeId norm_state, NodeId norm_action);

// Differentiable observation projection of a state batch (no noise).
NodeId observe_on_tape(Tape& tape, const Design& d, NodeId state);

// Zero-valued per-node recurrent state.
std::vector<NodeId> zero_hidden(Tape& tape, const Design& d, const NetArch& arch, int rows);

}  // namespace modbot

#endif  // MODBOT_NETS_HPP_
