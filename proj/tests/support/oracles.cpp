#include "oracles.hpp"

#include <bit>
#include <map>
#include <stdexcept>

namespace oracle {

std::vector<std::int64_t> dense_product(const sparse_code::SparseMatrix& a,
                                        const sparse_code::SparseMatrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("row mismatch");
  const auto da = a.to_dense();
  const auto db = b.to_dense();
  const std::size_t p = a.cols(), q = b.cols();
  std::vector<std::int64_t> out(p * q, 0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      const auto x = static_cast<std::int64_t>(da[r * p + i]);
      if (x == 0) continue;
      for (std::size_t j = 0; j < q; ++j) {
        out[i * q + j] += x * static_cast<std::int64_t>(db[r * q + j]);
      }
    }
  }
  return out;
}

bool equals_dense(const sparse_code::SparseMatrix& m, const std::vector<std::int64_t>& dense) {
  const auto d = m.to_dense();
  if (d.size() != dense.size()) return false;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (d[k] != static_cast<double>(dense[k])) return false;
  }
  // no explicit zeros either
  for (double v : m.values()) {
    if (v == 0) return false;
  }
  return true;
}

std::size_t dense_rank(std::vector<std::vector<Rational>> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][c] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[rank]);
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      if (rows[r][c] == 0) continue;
      const Rational f = rows[r][c] / rows[rank][c];
      for (std::size_t k = c; k < cols; ++k) rows[r][k] -= f * rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

namespace {

Rational binomial(std::size_t n, std::size_t k) {
  sparse_code::Integer out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return Rational(out);
}

}  // namespace

Rational matching_by_enumeration(const std::vector<Rational>& probs) {
  const std::size_t d = probs.size();
  if (d == 0 || d > 12) throw std::invalid_argument("enumeration supports 1 <= d <= 12");
  const std::uint32_t full = (1u << d) - 1;

  // per-support probability
  std::vector<Rational> support_prob(full + 1, Rational(0));
  for (std::uint32_t s = 1; s <= full; ++s) {
    const auto k = static_cast<std::size_t>(std::popcount(s));
    support_prob[s] = probs[k - 1] / binomial(d, k);
  }

  // State after t tasks: the set of column masks of size t that the first t
  // tasks can be matched into, encoded as a bit vector over masks.
  using State = std::vector<bool>;
  std::map<State, Rational> layer;
  State start(full + 1, false);
  start[0] = true;
  layer[start] = Rational(1);
  for (std::size_t t = 0; t < d; ++t) {
    std::map<State, Rational> next;
    for (const auto& [state, prob] : layer) {
      for (std::uint32_t s = 1; s <= full; ++s) {
        if (support_prob[s] == 0) continue;
        State grown(full + 1, false);
        bool any = false;
        for (std::uint32_t used = 0; used <= full; ++used) {
          if (!state[used]) continue;
          for (std::size_t c = 0; c < d; ++c) {
            const std::uint32_t bit = 1u << c;
            if ((s & bit) && !(used & bit)) {
              grown[used | bit] = true;
              any = true;
            }
          }
        }
        if (!any) continue;  // dead: no matching possible any more
        next[grown] += prob * support_prob[s];
      }
    }
    layer = std::move(next);
  }
  Rational total(0);
  for (const auto& [state, prob] : layer) {
    if (state[full]) total += prob;
  }
  return total;
}

std::size_t peelable_columns(const std::vector<std::vector<std::size_t>>& supports,
                             std::size_t width) {
  std::vector<bool> resolved(width, false);
  std::size_t count = 0;
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& row : supports) {
      std::size_t open = 0, last = 0;
      for (auto c : row) {
        if (!resolved[c]) {
          ++open;
          last = c;
        }
      }
      if (open == 1) {
        resolved[last] = true;
        ++count;
        progress = true;
      }
    }
  }
  return count;
}

Rational coupon_collector_mean(std::size_t k) {
  Rational h(0);
  for (std::size_t i = 1; i <= k; ++i) h += Rational(1) / Rational(i);
  return h * Rational(k);
}

}  // namespace oracle
