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

#include "modbot/param_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace modbot {

static_assert(std::endian::native == std::endian::little,
              "GGP1 serialization assumes a little-endian host");

namespace {
constexpr char kMagic[4] = {'G', 'G', 'P', '1'};

void write_u32(std::ofstream& f, uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::ifstream& f) {
  uint32_t v = 0;
  f.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
}  // namespace

Tensor& ParamStore::add(const std::string& name, Tensor t) {
  auto [it, inserted] = t_.emplace(name, std::move(t));
  if (!inserted) throw std::invalid_argument("ParamStore: duplicate tensor name '" + name + "'");
  return it->second;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = t_.find(name);
  if (it == t_.end()) throw std::out_of_range("ParamStore: no tensor named '" + name + "'");
  return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = t_.find(name);
  if (it == t_.end()) throw std::out_of_range("ParamStore: no tensor named '" + name + "'");
  return it->second;
}

int64_t ParamStore::total_size() const {
  int64_t n = 0;
  for (const auto& [_, t] : t_) n += t.size();
  return n;
}

std::vector<double> ParamStore::flatten() const {
  std::vector<double> flat;
  flat.reserve(total_size());
  for (const auto& [_, t] : t_) {
    flat.insert(flat.end(), t.data(), t.data() + t.size());
  }
  return flat;
}

void ParamStore::unflatten(const std::vector<double>& flat) {
  if (static_cast<int64_t>(flat.size()) != total_size()) {
    throw std::invalid_argument("ParamStore::unflatten: size mismatch");
  }
  size_t off = 0;
  for (auto& [_, t] : t_) {
    std::memcpy(t.data(), flat.data() + off, t.size() * sizeof(double));
    off += t.size();
  }
}

bool ParamStore::same_values(const ParamStore& other) const {
  if (t_.size() != other.t_.size()) return false;
  auto a = t_.begin();
  auto b = other.t_.begin();
  for (; a != t_.end(); ++a, ++b) {
    if (a->first != b->first || !a->second.same_values(b->second)) return false;
  }
  return true;
}

void ParamStore::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("ParamStore: cannot open '" + path.string() + "' for writing");
  f.write(kMagic, 4);
  for (const auto& [name, t] : t_) {
    write_u32(f, static_cast<uint32_t>(name.size()));
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(f, static_cast<uint32_t>(t.rank()));
    for (int d : t.shape()) write_u32(f, static_cast<uint32_t>(d));
    f.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!f) throw std::runtime_error("ParamStore: write failed for '" + path.string() + "'");
}

ParamStore ParamStore::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("ParamStore: cannot open '" + path.string() + "'");
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("ParamStore: '" + path.string() + "' is not a GGP1 file");
  }
  ParamStore ps;
  while (true) {
    uint32_t name_len = read_u32(f);
    if (f.eof()) break;
    if (!f || name_len > 4096) throw std::runtime_error("ParamStore: corrupt tensor record");
    std::string name(name_len, '\0');
    f.read(name.data(), name_len);
    const uint32_t rank = read_u32(f);
    if (!f || rank == 0 || rank > 2) throw std::runtime_error("ParamStore: bad rank");
    std::vector<int> shape(rank);
    int64_t n = 1;
    for (auto& d : shape) {
      d = static_cast<int>(read_u32(f));
      n *= d;
    }
    std::vector<double> values(n);
    f.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!f) throw std::runtime_error("ParamStore: truncated tensor record for '" + name + "'");
    ps.add(name, Tensor(shape, std::move(values)));
  }
  return ps;
}

}  // namespace modbot
