#include "sparse_code/encoder.hpp"

#include <algorithm>
#include <limits>

#include "sparse_code/error.hpp"

namespace sparse_code {

WeightSet::WeightSet(std::uint64_t max) : max_(max) {
  if (max < 1) throw InvalidParameter("weight set must contain at least one element");
}

WeightSet WeightSet::for_grid(std::size_t m, std::size_t n) {
  const std::uint64_t d = static_cast<std::uint64_t>(m) * n;
  return WeightSet(d * d);
}

Integer WeightSet::sample(Rng& rng) const {
  return Integer(static_cast<unsigned long>(uniform_below(rng, max_) + 1));
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::uncoded:
      return "uncoded";
    case Scheme::sparse:
      return "sparse";
    case Scheme::polynomial:
      return "polynomial";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "uncoded") return Scheme::uncoded;
  if (name == "sparse") return Scheme::sparse;
  if (name == "polynomial") return Scheme::polynomial;
  throw InvalidParameter("unknown scheme '" + name + "'");
}

void CoefficientMatrix::append(WeightRow row) {
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k].column >= cols_) throw ShapeError("weight column out of range");
    if (row[k].weight == 0) throw InvalidParameter("zero weight stored in coefficient row");
    if (k > 0 && row[k].column <= row[k - 1].column) {
      throw InvalidParameter("weight row columns must be strictly increasing");
    }
  }
  rows_.push_back(std::move(row));
}

std::size_t CoefficientMatrix::nnz() const {
  std::size_t total = 0;
  for (const auto& r : rows_) total += r.size();
  return total;
}

std::vector<Rational> CoefficientMatrix::dense_row(std::size_t k) const {
  std::vector<Rational> out(cols_, Rational(0));
  for (const auto& e : rows_.at(k)) out[e.column] = Rational(e.weight);
  return out;
}

WeightRow sparse_code_row(const DegreeDistribution& p, const WeightSet& weights, Rng& rng) {
  const auto support = sample_support(p, p.support_size(), rng);
  WeightRow row;
  row.reserve(support.size());
  for (const auto column : support) row.push_back({column, weights.sample(rng)});
  return row;
}

std::vector<CodedTask> encode_sparse(std::size_t m, std::size_t n, const DegreeDistribution& p,
                                     std::size_t workers, Rng& rng) {
  if (p.support_size() != m * n) {
    throw DimensionMismatch("distribution over " + std::to_string(p.support_size()) +
                            " degrees does not match mn = " + std::to_string(m * n));
  }
  if (workers < 1) throw InvalidParameter("need at least one worker");
  const auto weights = WeightSet::for_grid(m, n);
  std::vector<CodedTask> tasks(workers);
  for (std::size_t k = 0; k < workers; ++k) {
    tasks[k].worker_id = k;
    tasks[k].weights = sparse_code_row(p, weights, rng);
  }
  return tasks;
}

WeightRow polynomial_row(std::size_t m, std::size_t n, const Integer& x) {
  WeightRow row;
  row.reserve(m * n);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      Integer w;
      mpz_pow_ui(w.get_mpz_t(), x.get_mpz_t(), i + j * m);
      row.push_back({(i - 1) * n + (j - 1), std::move(w)});
    }
  }
  return row;
}

PolynomialCode encode_polynomial(std::size_t m, std::size_t n, std::size_t workers) {
  if (workers < m * n) {
    throw InsufficientWorkers("polynomial code needs at least mn = " + std::to_string(m * n) +
                              " workers, got " + std::to_string(workers));
  }
  PolynomialCode code;
  code.tasks.resize(workers);
  for (std::size_t k = 0; k < workers; ++k) {
    const Integer x(static_cast<unsigned long>(k + 1));
    code.points.push_back(x);
    code.tasks[k].worker_id = k;
    code.tasks[k].weights = polynomial_row(m, n, x);
  }
  return code;
}

std::vector<CodedTask> assign_uncoded(std::size_t m, std::size_t n, std::size_t workers) {
  const std::size_t blocks = m * n;
  if (workers < blocks) {
    throw InsufficientWorkers("uncoded assignment needs at least mn = " +
                              std::to_string(blocks) + " workers, got " +
                              std::to_string(workers));
  }
  std::vector<CodedTask> tasks(workers);
  for (std::size_t k = 0; k < workers; ++k) {
    tasks[k].worker_id = k;
    tasks[k].weights = {{k % blocks, Integer(1)}};
  }
  return tasks;
}

nlohmann::json tasks_to_json(std::span<const CodedTask> tasks) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : tasks) {
    nlohmann::json weights = nlohmann::json::object();
    for (const auto& e : t.weights) {
      const auto key = std::to_string(e.column);
      if (e.weight.fits_slong_p()) {
        weights[key] = e.weight.get_si();
      } else {
        weights[key] = e.weight.get_str();
      }
    }
    out.push_back({{"worker", t.worker_id}, {"weights", std::move(weights)}});
  }
  return out;
}

std::vector<CodedTask> tasks_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InvalidParameter("task set JSON must be an array");
  std::vector<CodedTask> tasks;
  for (const auto& item : j) {
    CodedTask task;
    task.worker_id = item.at("worker").get<std::size_t>();
    for (const auto& [key, value] : item.at("weights").items()) {
      Integer w = value.is_string() ? Integer(value.get<std::string>(), 10)
                                    : Integer(static_cast<long>(value.get<std::int64_t>()));
      if (w == 0) throw InvalidParameter("zero weight in task JSON");
      task.weights.push_back({static_cast<std::size_t>(std::stoull(key)), std::move(w)});
    }
    std::sort(task.weights.begin(), task.weights.end(),
              [](const auto& a, const auto& b) { return a.column < b.column; });
    tasks.push_back(std::move(task));
  }
  return tasks;
}

}  // namespace sparse_code
