#include "sparse_code/decoder.hpp"

#include <memory>

#include "sparse_code/random.hpp"

namespace sparse_code {

EchelonState::EchelonState(std::size_t width, bool track_combinations)
    : pivots_(width), track_(track_combinations) {}

bool EchelonState::insert(const WeightRow& row) {
  std::vector<Rational> dense(width(), Rational(0));
  for (const auto& e : row) {
    if (e.column >= width()) throw ShapeError("weight column outside the echelon width");
    dense[e.column] = Rational(e.weight);
  }
  return insert(std::span<const Rational>(dense));
}

bool EchelonState::insert(std::span<const Rational> dense_row) {
  if (dense_row.size() != width()) throw ShapeError("row length does not match echelon width");
  const std::size_t index = inserted_++;
  if (full_rank()) return false;
  std::vector<Rational> row(dense_row.begin(), dense_row.end());
  std::vector<Rational> combination;
  if (track_) {
    combination.assign(index + 1, Rational(0));
    combination[index] = 1;
  }
  for (std::size_t c = 0; c < width(); ++c) {
    if (row[c] == 0) continue;
    if (!pivots_[c]) {
      const Rational lead = row[c];
      for (std::size_t j = c; j < width(); ++j) {
        if (row[j] != 0) row[j] /= lead;
      }
      for (auto& v : combination) {
        if (v != 0) v /= lead;
      }
      pivots_[c] = Pivot{std::move(row), std::move(combination), index};
      ++rank_;
      return true;
    }
    const Rational f = row[c];
    const auto& p = *pivots_[c];
    for (std::size_t j = c; j < width(); ++j) {
      if (p.row[j] != 0) row[j] -= f * p.row[j];
    }
    for (std::size_t j = 0; j < p.combination.size(); ++j) {
      if (p.combination[j] != 0) combination[j] -= f * p.combination[j];
    }
  }
  return false;
}

std::vector<std::size_t> EchelonState::pivot_sources() const {
  std::vector<std::size_t> out;
  for (const auto& p : pivots_) {
    if (p) out.push_back(p->source);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::vector<Rational>> EchelonState::solve_combination(
    std::span<const Rational> target) const {
  if (!track_) throw InvalidParameter("solve_combination needs combination tracking");
  if (target.size() != width()) throw ShapeError("target length does not match echelon width");
  std::vector<Rational> rest(target.begin(), target.end());
  std::vector<Rational> u(inserted_, Rational(0));
  for (std::size_t c = 0; c < width(); ++c) {
    if (rest[c] == 0) continue;
    if (!pivots_[c]) return std::nullopt;
    const Rational f = rest[c];
    const auto& p = *pivots_[c];
    for (std::size_t j = c; j < width(); ++j) {
      if (p.row[j] != 0) rest[j] -= f * p.row[j];
    }
    for (std::size_t j = 0; j < p.combination.size(); ++j) {
      if (p.combination[j] != 0) u[j] += f * p.combination[j];
    }
  }
  return u;
}

std::vector<Rational> rooting_combination(std::span<const WeightRow> rows, std::size_t width,
                                          std::size_t k0) {
  if (k0 >= width) throw ShapeError("rooting column outside the block grid");
  EchelonState state(width, true);
  for (const auto& r : rows) state.insert(r);
  std::vector<Rational> target(width, Rational(0));
  target[k0] = 1;
  auto u = state.solve_combination(target);
  if (!u) {
    throw RankDeficient("column " + std::to_string(k0) + " is not recoverable from " +
                        std::to_string(rows.size()) + " residual rows");
  }
  return *u;
}

namespace {

std::size_t first_unresolved(const std::vector<bool>& resolved) {
  for (std::size_t c = 0; c < resolved.size(); ++c) {
    if (!resolved[c]) return c;
  }
  throw InvalidParameter("no unresolved column left");
}

}  // namespace

RootPicker max_incidence_root() {
  return [](std::span<const std::size_t> incidence, const std::vector<bool>& resolved) {
    std::size_t best = first_unresolved(resolved);
    for (std::size_t c = best + 1; c < resolved.size(); ++c) {
      if (!resolved[c] && incidence[c] > incidence[best]) best = c;
    }
    return best;
  };
}

RootPicker lowest_index_root() {
  return [](std::span<const std::size_t>, const std::vector<bool>& resolved) {
    return first_unresolved(resolved);
  };
}

RootPicker uniform_random_root(std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [rng](std::span<const std::size_t>, const std::vector<bool>& resolved) {
    std::vector<std::size_t> open;
    for (std::size_t c = 0; c < resolved.size(); ++c) {
      if (!resolved[c]) open.push_back(c);
    }
    if (open.empty()) throw InvalidParameter("no unresolved column left");
    return open[uniform_below(*rng, open.size())];
  };
}

RootPicker scripted_roots(std::vector<std::size_t> order, RootPicker fallback) {
  auto next = std::make_shared<std::size_t>(0);
  return [order = std::move(order), fallback = std::move(fallback), next](
             std::span<const std::size_t> incidence, const std::vector<bool>& resolved) {
    while (*next < order.size()) {
      const std::size_t c = order[(*next)++];
      if (c < resolved.size() && !resolved[c]) return c;
    }
    return fallback(incidence, resolved);
  };
}

nlohmann::json to_json(const DecodeStats& stats) {
  return {{"peeled", stats.peeled},
          {"rooted", stats.rooted},
          {"block_op_count", stats.block_op_count},
          {"rows_used", stats.rows_used},
          {"recovery_order", stats.recovery_order}};
}

namespace detail {

void require_full_rank(std::span<const WeightRow> rows, std::size_t width) {
  EchelonState state(width);
  for (const auto& r : rows) {
    state.insert(r);
    if (state.full_rank()) return;
  }
  throw RankDeficient("coefficient matrix has rank " + std::to_string(state.rank()) +
                      " < " + std::to_string(width));
}

}  // namespace detail

DecodePlan plan_hybrid_decode(std::span<const WeightRow> rows,
                              std::span<const std::size_t> worker_ids, std::size_t width,
                              const DecodeOptions& options) {
  if (rows.size() != worker_ids.size()) throw DimensionMismatch("one worker id per row");
  detail::require_full_rank(rows, width);
  detail::PlanSink sink;
  detail::run_hybrid(rows, worker_ids, width, options.pick_root, sink);
  return sink.plan;
}

std::vector<std::vector<Rational>> invert(std::vector<std::vector<Rational>> matrix) {
  const std::size_t size = matrix.size();
  std::vector<std::vector<Rational>> inverse(size, std::vector<Rational>(size, Rational(0)));
  for (std::size_t i = 0; i < size; ++i) {
    if (matrix[i].size() != size) throw ShapeError("invert needs a square matrix");
    inverse[i][i] = 1;
  }
  for (std::size_t c = 0; c < size; ++c) {
    std::size_t pivot = c;
    while (pivot < size && matrix[pivot][c] == 0) ++pivot;
    if (pivot == size) throw SingularSystem("system matrix is singular");
    std::swap(matrix[pivot], matrix[c]);
    std::swap(inverse[pivot], inverse[c]);
    const Rational lead = matrix[c][c];
    for (std::size_t j = 0; j < size; ++j) {
      matrix[c][j] /= lead;
      inverse[c][j] /= lead;
    }
    for (std::size_t r = 0; r < size; ++r) {
      if (r == c || matrix[r][c] == 0) continue;
      const Rational f = matrix[r][c];
      for (std::size_t j = 0; j < size; ++j) {
        matrix[r][j] -= f * matrix[c][j];
        inverse[r][j] -= f * inverse[c][j];
      }
    }
  }
  return inverse;
}

}  // namespace sparse_code
