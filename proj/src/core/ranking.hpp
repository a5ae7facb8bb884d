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

#pragma once

// Auction scoring with a per-context cache.
//
// Context-only quantities are computed once per auction; each candidate item
// then pays only for its own fields:
//   FM     cache Σ_C vᵢ and Σ_C ‖vᵢ‖²                     item cost O(|I|k)
//   DPLR   cache P_C = U_C·V_C and s_C = Σ_C dᵢ‖vᵢ‖²       item cost O(ρ|I|k)
//   Pruned cache V_C and the context-context pair sum      item cost O(q_item k)
//   Dense  same as pruned with every pair                  item cost O((|C||I| + |I|²)k)

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/model.hpp"

namespace lrfwfm {

/// Counts multiply-accumulates; each inner-loop update is one operation.
struct OpCounter {
  std::uint64_t ops = 0;
  void add(std::uint64_t n) noexcept { ops += n; }
  void reset() noexcept { ops = 0; }
};

/// Compiles away in timed code.
struct NullCounter {
  void add(std::uint64_t) noexcept {}
};

template <class Real>
struct ContextCache {
  ModelKind kind = ModelKind::kFm;
  Real linear = 0;  // b0 + Σ context weight·b[id]
  // FM: Σ_C ‖vᵢ‖²; DPLR: s_C; pruned/dense: context-context pair sum.
  Real scalar = 0;
  // FM: Σ_C vᵢ (k); DPLR: P_C (ρ×k); pruned/dense: V_C (m_c×k).
  std::vector<Real> block;

  bool operator==(const ContextCache&) const = default;
};

/// Scratch buffers reused across items; one per scoring thread.
template <class Real>
struct Workspace {
  std::vector<Real> item_vectors;
  std::vector<Real> acc;
};

template <class Real>
class RankingEngine {
 public:
  /// `params` must outlive the engine.
  explicit RankingEngine(const ModelParams& params);

  const ModelParams& params() const noexcept { return *params_; }
  std::size_t context_fields() const noexcept { return m_c_; }
  std::size_t item_fields() const noexcept { return m_i_; }

  // Vector-level entry points: rows of already gathered field vectors.
  template <class Counter>
  ContextCache<Real> build_cache(std::span<const Real> context_vectors,
                                 Real context_linear, Counter& counter) const;
  template <class Counter>
  Real score_vectors(const ContextCache<Real>& cache,
                     std::span<const Real> item_vectors, Real item_linear,
                     Workspace<Real>& ws, Counter& counter) const;

  // Feature-level entry points.
  template <class Counter>
  ContextCache<Real> build_context_cache(const FieldValues& context,
                                         Counter& counter) const;
  ContextCache<Real> build_context_cache(const FieldValues& context) const {
    NullCounter c;
    return build_context_cache(context, c);
  }

  template <class Counter>
  Real score_item(const ContextCache<Real>& cache, const FieldValues& item,
                  Workspace<Real>& ws, Counter& counter) const;
  Real score_item(const ContextCache<Real>& cache, const FieldValues& item,
                  Workspace<Real>& ws) const {
    NullCounter c;
    return score_item(cache, item, ws, c);
  }
  Real score_item(const ContextCache<Real>& cache, const FieldValues& item) const {
    Workspace<Real> ws;
    return score_item(cache, item, ws);
  }

  /// One cache build, then every item in input order.
  std::vector<Real> score_auction(const Auction& auction) const;

 private:
  struct Pair {
    std::uint32_t a;  // local index (context-local or item-local, see list)
    std::uint32_t b;
    Real value;
  };

  void check_fragment(const FieldValues& values, std::size_t expected,
                      const char* what) const;

  const ModelParams* params_;
  ModelKind kind_;
  std::size_t m_c_ = 0;
  std::size_t m_i_ = 0;
  std::size_t k_ = 0;

  // DPLR: U columns split by role, stored field-major (field × rank).
  std::size_t rank_ = 0;
  std::vector<Real> u_context_;
  std::vector<Real> u_item_;
  std::vector<Real> d_;
  std::vector<Real> e_;

  // Pruned and dense: pairs classified once per model.
  std::vector<Pair> cc_;  // both context (a, b context-local)
  std::vector<Pair> ci_;  // a context-local, b item-local
  std::vector<Pair> ii_;  // both item-local
};

/// Multiply-accumulate count of one score_item call on a single-valued item.
std::uint64_t per_item_op_count(const ModelParams& params);

// Implementation ----------------------------------------------------------

template <class Real>
RankingEngine<Real>::RankingEngine(const ModelParams& params)
    : params_(&params),
      kind_(params.kind()),
      m_c_(params.layout.context_fields()),
      m_i_(params.layout.item_fields()),
      k_(params.k) {
  const std::size_t m = params.layout.m();
  auto classify = [&](std::uint32_t i, std::uint32_t j, double v) {
    const Real r = static_cast<Real>(v);
    if (j < m_c_) {
      cc_.push_back({i, j, r});
    } else if (i < m_c_) {
      ci_.push_back({i, static_cast<std::uint32_t>(j - m_c_), r});
    } else {
      ii_.push_back({static_cast<std::uint32_t>(i - m_c_),
                     static_cast<std::uint32_t>(j - m_c_), r});
    }
  };
  if (const auto* dplr = std::get_if<Dplr>(&params.interaction)) {
    rank_ = dplr->rank();
    u_context_.resize(m_c_ * rank_);
    u_item_.resize(m_i_ * rank_);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t r = 0; r < rank_; ++r) {
        const Real x = static_cast<Real>(dplr->u(r, i));
        if (i < m_c_) {
          u_context_[i * rank_ + r] = x;
        } else {
          u_item_[(i - m_c_) * rank_ + r] = x;
        }
      }
    }
    d_.assign(dplr->d.begin(), dplr->d.end());
    e_.assign(dplr->e.begin(), dplr->e.end());
  } else if (const auto* pruned = std::get_if<PrunedSparse>(&params.interaction)) {
    for (const auto& e : pruned->entries) classify(e.i, e.j, e.value);
  } else if (const auto* dense = std::get_if<DenseSym>(&params.interaction)) {
    for (std::uint32_t i = 0; i < m; ++i)
      for (std::uint32_t j = i + 1; j < m; ++j) classify(i, j, dense->r(i, j));
  }
}

template <class Real>
void RankingEngine<Real>::check_fragment(const FieldValues& values,
                                         std::size_t expected,
                                         const char* what) const {
  if (values.field_count() != expected) {
    throw_data(std::string(what) + " fragment has " +
               std::to_string(values.field_count()) + " fields, model expects " +
               std::to_string(expected));
  }
}

template <class Real>
template <class Counter>
ContextCache<Real> RankingEngine<Real>::build_cache(
    std::span<const Real> vc, Real context_linear, Counter& counter) const {
  ContextCache<Real> cache;
  cache.kind = kind_;
  cache.linear = static_cast<Real>(params_->b0) + context_linear;
  const std::size_t k = k_;
  switch (kind_) {
    case ModelKind::kFm: {
      cache.block.assign(k, Real(0));
      Real sq = 0;
      for (std::size_t i = 0; i < m_c_; ++i) {
        const Real* v = vc.data() + i * k;
        for (std::size_t c = 0; c < k; ++c) {
          cache.block[c] += v[c];
          sq += v[c] * v[c];
        }
      }
      counter.add(2 * m_c_ * k);
      cache.scalar = sq;
      break;
    }
    case ModelKind::kDplr: {
      cache.block.assign(rank_ * k, Real(0));
      Real s = 0;
      for (std::size_t i = 0; i < m_c_; ++i) {
        const Real* v = vc.data() + i * k;
        const Real* u = u_context_.data() + i * rank_;
        Real sq = 0;
        for (std::size_t c = 0; c < k; ++c) sq += v[c] * v[c];
        s += d_[i] * sq;
        for (std::size_t r = 0; r < rank_; ++r) {
          Real* p = cache.block.data() + r * k;
          for (std::size_t c = 0; c < k; ++c) p[c] += u[r] * v[c];
        }
      }
      counter.add(m_c_ * (k + 1) + rank_ * m_c_ * k);
      cache.scalar = s;
      break;
    }
    case ModelKind::kPruned:
    case ModelKind::kFwFm: {
      cache.block.assign(vc.begin(), vc.begin() + m_c_ * k);
      Real s = 0;
      for (const auto& pr : cc_) {
        const Real* a = vc.data() + pr.a * k;
        const Real* b = vc.data() + pr.b * k;
        Real ip = 0;
        for (std::size_t c = 0; c < k; ++c) ip += a[c] * b[c];
        s += pr.value * ip;
      }
      counter.add(cc_.size() * (k + 1));
      cache.scalar = s;
      break;
    }
  }
  return cache;
}

template <class Real>
template <class Counter>
Real RankingEngine<Real>::score_vectors(const ContextCache<Real>& cache,
                                        std::span<const Real> vi,
                                        Real item_linear, Workspace<Real>& ws,
                                        Counter& counter) const {
  const std::size_t k = k_;
  Real pair = 0;
  switch (kind_) {
    case ModelKind::kFm: {
      ws.acc.assign(cache.block.begin(), cache.block.end());
      Real* s = ws.acc.data();
      Real sq = cache.scalar;
      for (std::size_t i = 0; i < m_i_; ++i) {
        const Real* v = vi.data() + i * k;
        for (std::size_t c = 0; c < k; ++c) {
          s[c] += v[c];
          sq += v[c] * v[c];
        }
      }
      Real total = 0;
      for (std::size_t c = 0; c < k; ++c) total += s[c] * s[c];
      counter.add(2 * m_i_ * k + k);
      pair = Real(0.5) * (total - sq);
      break;
    }
    case ModelKind::kDplr: {
      ws.acc.assign(cache.block.begin(), cache.block.end());
      Real* p = ws.acc.data();
      Real diag = cache.scalar;
      for (std::size_t i = 0; i < m_i_; ++i) {
        const Real* v = vi.data() + i * k;
        const Real* u = u_item_.data() + i * rank_;
        Real sq = 0;
        for (std::size_t c = 0; c < k; ++c) sq += v[c] * v[c];
        diag += d_[m_c_ + i] * sq;
        for (std::size_t r = 0; r < rank_; ++r) {
          Real* pr = p + r * k;
          for (std::size_t c = 0; c < k; ++c) pr[c] += u[r] * v[c];
        }
      }
      Real low = 0;
      for (std::size_t r = 0; r < rank_; ++r) {
        const Real* pr = p + r * k;
        Real pn = 0;
        for (std::size_t c = 0; c < k; ++c) pn += pr[c] * pr[c];
        low += e_[r] * pn;
      }
      counter.add(m_i_ * (k + 1) + rank_ * m_i_ * k + rank_ * (k + 1));
      pair = Real(0.5) * (diag + low);
      break;
    }
    case ModelKind::kPruned:
    case ModelKind::kFwFm: {
      const Real* vc = cache.block.data();
      Real s = cache.scalar;
      for (const auto& pr : ci_) {
        const Real* a = vc + pr.a * k;
        const Real* b = vi.data() + pr.b * k;
        Real ip = 0;
        for (std::size_t c = 0; c < k; ++c) ip += a[c] * b[c];
        s += pr.value * ip;
      }
      for (const auto& pr : ii_) {
        const Real* a = vi.data() + pr.a * k;
        const Real* b = vi.data() + pr.b * k;
        Real ip = 0;
        for (std::size_t c = 0; c < k; ++c) ip += a[c] * b[c];
        s += pr.value * ip;
      }
      counter.add((ci_.size() + ii_.size()) * (k + 1));
      pair = s;
      break;
    }
  }
  return cache.linear + item_linear + pair;
}

template <class Real>
template <class Counter>
ContextCache<Real> RankingEngine<Real>::build_context_cache(
    const FieldValues& context, Counter& counter) const {
  check_fragment(context, m_c_, "context");
  std::vector<Real> vc(m_c_ * k_);
  gather_into<Real>(context, 0, *params_, std::span<Real>(vc));
  counter.add(context.features().size() * (k_ + 1));
  const Real lin = linear_sum<Real>(context, 0, *params_);
  return build_cache(std::span<const Real>(vc), lin, counter);
}

template <class Real>
template <class Counter>
Real RankingEngine<Real>::score_item(const ContextCache<Real>& cache,
                                     const FieldValues& item,
                                     Workspace<Real>& ws,
                                     Counter& counter) const {
  if (cache.kind != kind_) throw_invalid("context cache built for another model kind");
  check_fragment(item, m_i_, "item");
  ws.item_vectors.resize(m_i_ * k_);
  gather_into<Real>(item, m_c_, *params_, std::span<Real>(ws.item_vectors));
  counter.add(item.features().size() * (k_ + 1));
  const Real lin = linear_sum<Real>(item, m_c_, *params_);
  return score_vectors(cache, std::span<const Real>(ws.item_vectors), lin, ws,
                       counter);
}

template <class Real>
std::vector<Real> RankingEngine<Real>::score_auction(const Auction& auction) const {
  if (auction.items.empty()) throw_data("auction has no items");
  const auto cache = build_context_cache(auction.context);
  Workspace<Real> ws;
  std::vector<Real> out;
  out.reserve(auction.items.size());
  for (const auto& item : auction.items) out.push_back(score_item(cache, item, ws));
  return out;
}

}  // namespace lrfwfm
