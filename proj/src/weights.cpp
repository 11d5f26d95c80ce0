// SPDX-License-Identifier: Apache-2.0
//
// arrayopt - sparse phased-array layout optimization with neural surrogates
// Copyright (C) 2026 The arrayopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "arrayopt/weights.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "arrayopt/error.hpp"

namespace arrayopt {

static_assert(std::endian::native == std::endian::little, "weight files are little-endian");

namespace {

constexpr char kMagic[4] = {'N', 'N', 'W', '1'};

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}

  template <class T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string r = s_.substr(pos_, n);
    pos_ += n;
    return r;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (s_.size() - pos_ < n) fail(ErrorCode::io, std::string("weights: truncated while reading ") + what);
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_weights(std::uint32_t arch_id, std::span<const Parameter> params) {
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, arch_id);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter& p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out += p.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) put<std::uint64_t>(out, d);
    for (double v : p.value.values()) put<double>(out, v);
  }
  return out;
}

WeightFile parse_weights(const std::string& bytes) {
  Reader r(bytes);
  if (r.bytes(4, "magic") != std::string(kMagic, 4)) fail(ErrorCode::io, "weights: bad magic, not an NNW1 file");
  WeightFile wf;
  wf.arch_id = r.get<std::uint32_t>("architecture id");
  const auto count = r.get<std::uint32_t>("parameter count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint32_t>("name length");
    std::string name = r.bytes(name_len, "name");
    const auto rank = r.get<std::uint32_t>("rank");
    if (rank > 8) fail(ErrorCode::io, "weights: implausible rank for " + name);
    std::vector<std::size_t> shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
      d = static_cast<std::size_t>(r.get<std::uint64_t>("dims"));
      if (d != 0 && n > (std::size_t{1} << 40) / d) fail(ErrorCode::io, "weights: implausible shape for " + name);
      n *= d;
    }
    std::vector<double> values(n);
    for (auto& v : values) v = r.get<double>("values");
    wf.params.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (!r.done()) fail(ErrorCode::io, "weights: trailing bytes after last parameter");
  return wf;
}

void write_weights(const std::string& path, std::uint32_t arch_id, std::span<const Parameter> params) {
  const std::string bytes = serialize_weights(arch_id, params);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::io, "cannot open " + path + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(ErrorCode::io, "write failed: " + path);
}

WeightFile read_weights(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_weights(ss.str());
}

}  // namespace arrayopt
