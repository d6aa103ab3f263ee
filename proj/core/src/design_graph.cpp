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

#include "modbot/design_graph.hpp"

#include <map>

namespace modbot {

namespace {

const std::map<std::string, std::string>& alias_table() {
  static const std::map<std::string, std::string> table = {
      {"hex6l", "LLL|LLL"},
      {"car4w", "WNW|WNW"},
      {"llw", "LLW|LLW"},
      {"lnw", "LNW|LNW"},
  };
  return table;
}

ModuleKind kind_from_char(char c) {
  switch (c) {
    case 'L':
      return ModuleKind::kLeg;
    case 'W':
      return ModuleKind::kWheel;
    case 'N':
      return ModuleKind::kNone;
    default:
      throw DesignError(std::string("invalid module character '") + c +
                        "' (expected L, W, or N)");
  }
}

char char_from_kind(ModuleKind k) {
  switch (k) {
    case ModuleKind::kLeg:
      return 'L';
    case ModuleKind::kWheel:
      return 'W';
    case ModuleKind::kNone:
      return 'N';
    default:
      return '?';
  }
}

}  // namespace

const char* kind_name(ModuleKind k) {
  switch (k) {
    case ModuleKind::kBody:
      return "body";
    case ModuleKind::kLeg:
      return "leg";
    case ModuleKind::kWheel:
      return "wheel";
    case ModuleKind::kNone:
      return "none";
  }
  return "?";
}

bool Design::is_known_alias(const std::string& s) {
  return alias_table().count(s) > 0;
}

Design Design::parse(const std::string& spec) {
  std::string pattern = spec;
  std::string name = spec;
  auto it = alias_table().find(spec);
  if (it != alias_table().end()) {
    pattern = it->second;
  } else {
    name = spec;
  }

  if (pattern.size() != 7 || pattern[3] != '|') {
    throw DesignError("malformed design pattern '" + spec +
                      "': expected alias or \"XYZ|XYZ\" with X,Y,Z in {L,W,N}");
  }

  Design d;
  d.name_ = name;
  d.pattern_ = pattern;
  int populated = 0;
  for (int i = 0; i < kNumPorts; ++i) {
    const char c = pattern[i < 3 ? i : i + 1];
    d.slots_[i] = kind_from_char(c);
    if (d.slots_[i] != ModuleKind::kNone) ++populated;
  }
  if (populated == 0) {
    throw DesignError("design '" + spec + "' has no modules (all-None pattern)");
  }

  // Body node first, module nodes in ascending slot order.
  d.nodes_.push_back({-1, ModuleKind::kBody});
  d.node_of_slot_.fill(-1);
  for (int i = 0; i < kNumPorts; ++i) {
    if (d.slots_[i] == ModuleKind::kNone) continue;
    d.node_of_slot_[i] = static_cast<int>(d.nodes_.size());
    d.nodes_.push_back({i, d.slots_[i]});
  }

  d.state_off_.resize(d.nodes_.size());
  d.obs_off_.resize(d.nodes_.size());
  d.act_off_.resize(d.nodes_.size());
  int s = 0, o = 0, a = 0;
  for (size_t n = 0; n < d.nodes_.size(); ++n) {
    const KindInfo info = kind_info(d.nodes_[n].kind);
    d.state_off_[n] = s;
    d.obs_off_[n] = o;
    d.act_off_[n] = a;
    s += info.state_dim;
    o += info.obs_dim;
    a += info.dof;
  }
  d.state_dim_ = s;
  d.obs_dim_ = o;
  d.action_dim_ = a;

  // Star topology: body<->module in both directions, per slot ascending.
  // Both directions carry the feature of the module endpoint.
  for (size_t n = 1; n < d.nodes_.size(); ++n) {
    const int slot = d.nodes_[n].slot;
    std::array<double, 7> f{};
    f[slot] = 1.0;
    f[6] = port(slot).side;
    d.edges_.push_back({0, static_cast<int>(n), f});
    d.edges_.push_back({static_cast<int>(n), 0, f});
  }
  return d;
}

std::string Design::mirrored_pattern() const {
  std::string m = "XXX|XXX";
  for (int i = 0; i < 3; ++i) {
    m[i] = char_from_kind(slots_[i + 3]);
    m[i + 4] = char_from_kind(slots_[i]);
  }
  return m;
}

}  // namespace modbot
