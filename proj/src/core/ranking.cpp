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

#include "core/ranking.hpp"

namespace lrfwfm {

template class RankingEngine<double>;
template class RankingEngine<float>;

std::uint64_t per_item_op_count(const ModelParams& params) {
  const RankingEngine<double> engine(params);
  FieldValues context;
  for (std::size_t f = 0; f < engine.context_fields(); ++f) context.add_single(kRareId);
  FieldValues item;
  for (std::size_t f = 0; f < engine.item_fields(); ++f) item.add_single(kRareId);
  const auto cache = engine.build_context_cache(context);
  Workspace<double> ws;
  OpCounter counter;
  engine.score_item(cache, item, ws, counter);
  return counter.ops;
}

}  // namespace lrfwfm
