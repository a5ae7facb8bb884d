// Copyright (c) 2026 The lrfwfm Authors. All Rights Reserved.
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

#include "core/model_io.hpp"

#include <bit>
#include <cstring>

#include "core/io.hpp"

namespace lrfwfm {

namespace {

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<char>((v >> s) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int s = 0; s < 64; s += 8) out_.push_back(static_cast<char>((v >> s) & 0xff));
  }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  std::vector<char> take() { return std::move(out_); }

 private:
  std::vector<char> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const char> in) : in_(in) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + b])) << (8 * b);
    }
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    const std::uint64_t hi = u32();
    return lo | (hi << 32);
  }
  double f32() {
    const float f = std::bit_cast<float>(u32());
    if (!std::isfinite(f)) throw_format("model file contains a non-finite value");
    return f;
  }
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw_format("model file is truncated");
  }
  std::span<const char> take(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const char> in_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::uint64_t v, const char* what) {
  if (v > 0xffffffffULL) throw_invalid(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<char> serialize_model(const ModelParams& p) {
  validate(p);
  const auto m = p.layout.m();
  Writer w;
  w.raw(kModelMagic, sizeof(kModelMagic));
  w.u32(static_cast<std::uint32_t>(p.kind()));
  w.u32(checked_u32(m, "m"));
  w.u32(checked_u32(p.layout.context_fields(), "m_c"));
  w.u32(checked_u32(p.k, "k"));
  const auto* dplr = std::get_if<Dplr>(&p.interaction);
  w.u32(dplr ? checked_u32(dplr->rank(), "rank") : 0);
  w.u64(p.layout.n());
  for (auto v : p.layout.vocab_sizes()) w.u32(v);
  w.f32(p.b0);
  for (double x : p.b) w.f32(x);
  for (double x : p.w) w.f32(x);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DenseSym>) {
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) w.f32(s.r(i, j));
        } else if constexpr (std::is_same_v<T, PrunedSparse>) {
          w.u32(checked_u32(s.entries.size(), "q"));
          for (const auto& e : s.entries) {
            w.u32(e.i);
            w.u32(e.j);
            w.f32(e.value);
          }
        } else if constexpr (std::is_same_v<T, Dplr>) {
          for (double x : s.u.data()) w.f32(x);
          for (double x : s.e) w.f32(x);
        }
      },
      p.interaction);
  return w.take();
}

ModelParams deserialize_model(std::span<const char> bytes) {
  Reader r(bytes);
  auto magic = r.take(sizeof(kModelMagic));
  if (std::memcmp(magic.data(), kModelMagic, sizeof(kModelMagic)) != 0) {
    throw_format("not a model file (bad magic)");
  }
  const auto kind = r.u32();
  if (kind > static_cast<std::uint32_t>(ModelKind::kDplr)) {
    throw_format("unknown model kind " + std::to_string(kind));
  }
  const std::size_t m = r.u32();
  const std::size_t m_c = r.u32();
  const std::size_t k = r.u32();
  const std::size_t rank = r.u32();
  const std::uint64_t n = r.u64();
  if (m < 2 || m_c < 1 || m_c >= m || k < 1) {
    throw_format("model header has inconsistent dimensions");
  }
  const bool is_dplr = kind == static_cast<std::uint32_t>(ModelKind::kDplr);
  if (is_dplr ? rank < 1 : rank != 0) throw_format("model header has an invalid rank");
  r.need(4 * m);
  std::vector<std::uint32_t> vocab(m);
  std::uint64_t total = 0;
  for (auto& v : vocab) {
    v = r.u32();
    total += v;
  }
  if (total != n) throw_format("vocabulary sizes do not sum to n");
  if (n > bytes.size()) throw_format("model file is truncated");

  ModelParams p;
  try {
    p.layout = FieldLayout(m_c, std::move(vocab));
  } catch (const Error& e) {
    throw_format(std::string("model layout: ") + e.what());
  }
  p.k = k;
  r.need(4 * (1 + n + n * k));
  p.b0 = r.f32();
  p.b.resize(n);
  for (auto& x : p.b) x = r.f32();
  p.w.resize(n * k);
  for (auto& x : p.w) x = r.f32();

  switch (static_cast<ModelKind>(kind)) {
    case ModelKind::kFm:
      p.interaction = FmImplicit{};
      break;
    case ModelKind::kFwFm: {
      DenseSym s{linalg::Mat(m, m)};
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
          const double v = r.f32();
          s.r(i, j) = v;
          s.r(j, i) = v;
        }
      p.interaction = std::move(s);
      break;
    }
    case ModelKind::kPruned: {
      const std::uint64_t q = r.u32();
      if (q > m * (m - 1) / 2) throw_format("pruned entry count exceeds m(m-1)/2");
      r.need(12 * q);
      PrunedSparse s;
      s.entries.resize(q);
      for (auto& e : s.entries) {
        e.i = r.u32();
        e.j = r.u32();
        e.value = r.f32();
      }
      p.interaction = std::move(s);
      break;
    }
    case ModelKind::kDplr: {
      r.need(4 * (rank * m + rank));
      Dplr s;
      s.u = linalg::Mat(rank, m);
      for (auto& x : s.u.data()) x = r.f32();
      s.e.resize(rank);
      for (auto& x : s.e) x = r.f32();
      s.refresh_diagonal();
      p.interaction = std::move(s);
      break;
    }
  }
  if (!r.done()) throw_format("model file has trailing bytes");
  try {
    validate(p);
  } catch (const Error& e) {
    throw_format(std::string("model file: ") + e.what());
  }
  return p;
}

void save_model(const std::string& path, const ModelParams& params) {
  const auto bytes = serialize_model(params);
  write_file(path, bytes);
}

ModelParams load_model(const std::string& path) {
  const auto bytes = read_file(path);
  return deserialize_model(std::span<const char>(bytes.data(), bytes.size()));
}

}  // namespace lrfwfm
