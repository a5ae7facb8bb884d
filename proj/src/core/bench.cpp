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

#include "core/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <tuple>

#include "core/decompose.hpp"
#include "core/error.hpp"
#include "core/model.hpp"
#include "core/random.hpp"
#include "core/ranking.hpp"

namespace lrfwfm {

void validate(const BenchGrid& g) {
  if (g.m < 2) throw_invalid("bench needs m >= 2");
  if (g.k < 1) throw_invalid("bench needs k >= 1");
  if (g.repetitions < 2) throw_invalid("bench needs at least 2 repetitions");
  if (g.auctions_per_measurement < 1) throw_invalid("bench needs at least 1 auction per measurement");
  if (g.context_counts.empty() || g.ranks.empty() || g.auction_sizes.empty()) {
    throw_invalid("bench grid lists must be non-empty");
  }
  for (auto c : g.context_counts) {
    if (c < 1 || c >= g.m) {
      throw_invalid("context count " + std::to_string(c) + " must be in [1, m)");
    }
  }
  for (auto r : g.ranks) {
    if (r < 1) throw_invalid("bench ranks must be at least 1");
    if (rank_equivalent_keep(r, g.m) > g.m * (g.m - 1) / 2) {
      throw_invalid("rank " + std::to_string(r) + " keeps more entries than m(m-1)/2");
    }
  }
  for (auto s : g.auction_sizes) {
    if (s < 1) throw_invalid("auction sizes must be at least 1");
  }
}

namespace {

struct Engine {
  std::string name;
  std::uint64_t rank_or_keep;
  ModelParams params;
};

ModelParams vector_model(std::size_t m, std::size_t m_c, std::size_t k,
                         InteractionSpec spec) {
  ModelParams p;
  p.layout = FieldLayout(m_c, std::vector<std::uint32_t>(m, 1));
  p.k = k;
  p.b.assign(m, 0.0);
  p.w.assign(m * k, 0.0);
  p.interaction = std::move(spec);
  return p;
}

linalg::Mat random_symmetric(std::size_t m, Rng& rng) {
  linalg::Mat r(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) r(i, j) = r(j, i) = standard_normal(rng);
  return r;
}

Dplr random_dplr(std::size_t m, std::size_t rank, Rng& rng) {
  Dplr d;
  d.u = linalg::Mat(rank, m);
  for (auto& x : d.u.data()) x = standard_normal(rng) / std::sqrt(static_cast<double>(m));
  d.e.resize(rank);
  for (auto& x : d.e) x = standard_normal(rng);
  d.refresh_diagonal();
  return d;
}

struct AuctionVectors {
  std::vector<double> context;  // m_c × k
  std::vector<double> items;    // size × m_i × k
};

void fill_normal(std::vector<double>& v, Rng& rng) {
  for (auto& x : v) x = standard_normal(rng);
}

double score_auction_vectors(const RankingEngine<double>& engine,
                             const AuctionVectors& a, std::size_t size,
                             Workspace<double>& ws, std::vector<double>& out) {
  NullCounter nc;
  const auto cache = engine.build_cache(std::span<const double>(a.context), 0.0, nc);
  const std::size_t stride = engine.item_fields() * engine.params().k;
  double sink = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    out[i] = engine.score_vectors(
        cache, std::span<const double>(a.items.data() + i * stride, stride), 0.0, ws, nc);
    sink += out[i];
  }
  return sink;
}

void check_against_oracle(const Engine& e, const AuctionVectors& a, std::size_t size,
                          std::span<const double> scores) {
  const auto& p = e.params;
  const std::size_t m = p.layout.m();
  const std::size_t m_c = p.layout.context_fields();
  const std::size_t k = p.k;
  const auto r = materialize_r(p.interaction, m);
  FieldVectors<double> fv(m, k);
  std::copy(a.context.begin(), a.context.end(), fv.v.begin());
  const std::size_t stride = (m - m_c) * k;
  for (std::size_t i = 0; i < size; ++i) {
    std::copy_n(a.items.begin() + i * stride, stride, fv.v.begin() + m_c * k);
    const double want = pairwise_bruteforce(fv, r);
    if (std::abs(scores[i] - want) > 1e-9 * (1.0 + std::abs(want))) {
      throw_numeric(e.name + " engine disagrees with the brute-force oracle (" +
                    std::to_string(scores[i]) + " vs " + std::to_string(want) + ")");
    }
  }
}

}  // namespace

std::vector<BenchRecord> run_grid(const BenchGrid& g) {
  validate(g);
  using Clock = std::chrono::steady_clock;
  std::vector<BenchRecord> records;
  Rng rng(g.seed);
  const std::size_t k = g.k;
  volatile double sink = 0.0;

  for (std::size_t m_c : g.context_counts) {
    const std::size_t m_i = g.m - m_c;
    std::vector<Engine> engines;
    const auto dense_r = random_symmetric(g.m, rng);
    for (std::size_t rank : g.ranks) {
      engines.push_back({"dplr", rank, vector_model(g.m, m_c, k, random_dplr(g.m, rank, rng))});
      const auto q = rank_equivalent_keep(rank, g.m);
      engines.push_back({"pruned", q,
                         vector_model(g.m, m_c, k, prune(DenseSym{dense_r}, q))});
    }
    if (g.baselines) {
      engines.push_back({"fm", 0, vector_model(g.m, m_c, k, FmImplicit{})});
      engines.push_back({"fwfm", g.m * (g.m - 1) / 2,
                         vector_model(g.m, m_c, k, DenseSym{dense_r})});
    }

    for (const auto& e : engines) {
      const RankingEngine<double> engine(e.params);
      for (std::size_t size : g.auction_sizes) {
        std::vector<AuctionVectors> auctions(g.auctions_per_measurement);
        for (auto& a : auctions) {
          a.context.resize(m_c * k);
          a.items.resize(size * m_i * k);
        }
        std::vector<double> scores(size);
        Workspace<double> ws;

        // Counted single item; the count does not depend on the values.
        std::uint64_t ops = 0;
        {
          fill_normal(auctions[0].context, rng);
          fill_normal(auctions[0].items, rng);
          NullCounter nc;
          const auto cache = engine.build_cache(
              std::span<const double>(auctions[0].context), 0.0, nc);
          OpCounter counter;
          engine.score_vectors(
              cache, std::span<const double>(auctions[0].items.data(), m_i * k), 0.0,
              ws, counter);
          ops = counter.ops;
          score_auction_vectors(engine, auctions[0], size, ws, scores);
          check_against_oracle(e, auctions[0], size, scores);
        }

        for (std::size_t rep = 0; rep < g.repetitions; ++rep) {
          for (auto& a : auctions) {
            fill_normal(a.context, rng);
            fill_normal(a.items, rng);
          }
          sink = sink + score_auction_vectors(engine, auctions[0], size, ws, scores);
          const auto t0 = Clock::now();
          for (const auto& a : auctions) {
            sink = sink + score_auction_vectors(engine, a, size, ws, scores);
          }
          const auto t1 = Clock::now();
          const auto elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
          BenchRecord rec;
          rec.engine = e.name;
          rec.rank_or_keep = e.rank_or_keep;
          rec.m = g.m;
          rec.context_fields = m_c;
          rec.auction_size = size;
          rec.rep = rep;
          rec.low_resolution = elapsed < 1000;
          const double per_auction =
              static_cast<double>(elapsed) / static_cast<double>(g.auctions_per_measurement);
          rec.total_ns = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(per_auction)));
          rec.per_item_ns = std::max(per_auction, 1.0) / static_cast<double>(size);
          rec.per_item_ops = ops;
          records.push_back(std::move(rec));
        }
      }
    }
  }
  return records;
}

std::vector<BenchSummary> summarize(const std::vector<BenchRecord>& records) {
  using Key = std::tuple<std::string, std::uint64_t, std::size_t, std::size_t, std::size_t>;
  std::map<Key, std::size_t> index;
  std::vector<BenchSummary> rows;
  std::vector<std::vector<const BenchRecord*>> groups;
  for (const auto& r : records) {
    const Key key{r.engine, r.rank_or_keep, r.m, r.context_fields, r.auction_size};
    auto [it, inserted] = index.try_emplace(key, rows.size());
    if (inserted) {
      BenchSummary s;
      s.engine = r.engine;
      s.rank_or_keep = r.rank_or_keep;
      s.m = r.m;
      s.context_fields = r.context_fields;
      s.auction_size = r.auction_size;
      s.per_item_ops = r.per_item_ops;
      rows.push_back(s);
      groups.emplace_back();
    }
    groups[it->second].push_back(&r);
  }
  if (rows.empty()) throw_invalid("no bench records to summarize");
  auto mean_se = [](const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& group = groups[i];
    if (group.size() < 2) {
      throw_invalid("configuration " + rows[i].engine + "/" +
                    std::to_string(rows[i].rank_or_keep) + " has fewer than 2 records");
    }
    std::vector<double> total;
    std::vector<double> item;
    for (const auto* r : group) {
      total.push_back(static_cast<double>(r->total_ns));
      item.push_back(r->per_item_ns);
    }
    rows[i].reps = group.size();
    std::tie(rows[i].mean_total_ns, rows[i].se_total_ns) = mean_se(total);
    std::tie(rows[i].mean_per_item_ns, rows[i].se_per_item_ns) = mean_se(item);
  }
  return rows;
}

std::string format_records(const std::vector<BenchRecord>& records) {
  std::string out = kBenchHeader;
  out += '\n';
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%s,%llu,%zu,%zu,%zu,%zu,%llu,%.4f,%llu\n",
                  r.engine.c_str(), static_cast<unsigned long long>(r.rank_or_keep), r.m,
                  r.context_fields, r.auction_size, r.rep,
                  static_cast<unsigned long long>(r.total_ns), r.per_item_ns,
                  static_cast<unsigned long long>(r.per_item_ops));
    out += buf;
  }
  return out;
}

std::string format_summary(const std::vector<BenchSummary>& rows) {
  std::string out =
      "engine,rank_or_keep,m,context_fields,auction_size,reps,mean_total_ns,"
      "se_total_ns,mean_per_item_ns,se_per_item_ns,per_item_ops\n";
  char buf[320];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%llu,%zu,%zu,%zu,%zu,%.4f,%.4f,%.4f,%.4f,%llu\n",
                  r.engine.c_str(), static_cast<unsigned long long>(r.rank_or_keep), r.m,
                  r.context_fields, r.auction_size, r.reps, r.mean_total_ns,
                  r.se_total_ns, r.mean_per_item_ns, r.se_per_item_ns,
                  static_cast<unsigned long long>(r.per_item_ops));
    out += buf;
  }
  return out;
}

}  // namespace lrfwfm
