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

#ifndef MODBOT_PARAM_STORE_HPP_
#define MODBOT_PARAM_STORE_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "modbot/tensor.hpp"

namespace modbot {

// Named tensor collection for network parameters. Iteration (and the
// on-disk layout) is always in sorted name order, which keeps flatten /
// gradient reduction / serialization deterministic.
//
// File format ("GGP1"): 4 magic bytes, then per tensor in sorted name
// order: name length (u32 LE), name bytes, rank (u32 LE), dims (u32 LE
// each), values (f64 LE).
class ParamStore {
 public:
  ParamStore() = default;

  Tensor& add(const std::string& name, Tensor t);
  bool has(const std::string& name) const { return t_.count(name) > 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  std::map<std::string, Tensor>& tensors() { return t_; }
  const std::map<std::string, Tensor>& tensors() const { return t_; }
  size_t count() const { return t_.size(); }
  int64_t total_size() const;

  // Round-trips through a single vector; unflatten requires an exact size
  // match against the current tensor set.
  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& flat);

  // Deep copy, unaffected by later updates to this store.
  ParamStore snapshot() const { return *this; }
  bool same_values(const ParamStore& other) const;

  void save(const std::filesystem::path& path) const;
  static ParamStore load(const std::filesystem::path& path);

 private:
  std::map<std::string, Tensor> t_;
};

}  // namespace modbot

#endif  // MODBOT_PARAM_STORE_HPP_
