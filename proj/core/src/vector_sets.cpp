#include <algorithm>
#include <cmath>
#include <limits>

#include "linlb/errors.hpp"
#include "linlb/features.hpp"
#include "linlb/rng.hpp"

namespace linlb {

std::string_view to_string(VectorKind k) {
  switch (k) {
    case VectorKind::jl: return "jl";
    case VectorKind::packing: return "packing";
    case VectorKind::packing_lifted: return "packing-lifted";
  }
  return "jl";
}

VectorKind parse_vector_kind(std::string_view text) {
  if (text == "jl") return VectorKind::jl;
  if (text == "packing") return VectorKind::packing;
  if (text == "packing-lifted") return VectorKind::packing_lifted;
  throw InvalidArgument("unknown vector-set kind '" + std::string(text) + "'");
}

int jl_dimension(std::uint64_t n, double eps) {
  if (n < 2) throw InvalidArgument("JL dimension needs n >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("JL eps must lie in (0, 1)");
  return static_cast<int>(std::ceil(8.0 * std::log(static_cast<double>(n)) / (eps * eps)));
}

namespace {

constexpr Eigen::Index kBlockRows = 512;

template <typename Reduce>
double reduce_offdiag(const RowMatrix& v, double init, Reduce reduce) {
  double acc = init;
  const Eigen::Index n = v.rows();
  for (Eigen::Index i0 = 0; i0 < n; i0 += kBlockRows) {
    const Eigen::Index rows = std::min(kBlockRows, n - i0);
    // Lower triangle only: block i0 against everything up to its end.
    const Eigen::MatrixXd g = v.middleRows(i0, rows) * v.topRows(i0 + rows).transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < i0 + r; ++c) acc = reduce(acc, g(r, c));
    }
  }
  return acc;
}

void normalize_rows(RowMatrix& v) {
  for (Eigen::Index i = 0; i < v.rows(); ++i) v.row(i).normalize();
}

}  // namespace

double max_abs_offdiag_inner(const RowMatrix& vectors) {
  return reduce_offdiag(vectors, 0.0,
                        [](double acc, double x) { return std::max(acc, std::abs(x)); });
}

double max_offdiag_inner(const RowMatrix& vectors) {
  return reduce_offdiag(vectors, -std::numeric_limits<double>::infinity(),
                        [](double acc, double x) { return std::max(acc, x); });
}

VectorSet sample_jl_set(std::uint64_t n, double eps, std::uint64_t seed, int max_rounds) {
  if (n <= 2) throw InvalidArgument("sample_jl_set needs n > 2");
  if (max_rounds < 1) throw InvalidArgument("max_rounds must be positive");
  const int dim = jl_dimension(n, eps);
  VectorSet set;
  set.kind = VectorKind::jl;
  set.eps = eps;
  set.vectors.resize(static_cast<Eigen::Index>(n), dim);
  for (int round = 0; round < max_rounds; ++round) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(round));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index i = 0; i < set.vectors.rows(); ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) set.vectors(i, j) = gauss(rng);
    }
    normalize_rows(set.vectors);
    if (max_abs_offdiag_inner(set.vectors) <= eps) return set;
  }
  throw ConstructionFailed("no eps-orthogonal set found in " + std::to_string(max_rounds) +
                           " rounds (n = " + std::to_string(n) + ")");
}

PackingResult greedy_packing(int dim, double eps, std::size_t target_n, std::uint64_t seed,
                             std::uint64_t max_attempts) {
  if (dim < 2) throw InvalidArgument("greedy_packing needs dim >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("packing eps must lie in (0, 1)");
  if (target_n < 1) throw InvalidArgument("packing target must be positive");
  const double max_inner = 1.0 - eps / 2.0;

  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  RowMatrix accepted(static_cast<Eigen::Index>(target_n), dim);
  Eigen::Index count = 0;
  std::uint64_t rejected_in_a_row = 0;
  std::uint64_t drawn = 0;
  Vector x(dim);
  while (static_cast<std::size_t>(count) < target_n && rejected_in_a_row < max_attempts) {
    for (int j = 0; j < dim; ++j) x(j) = gauss(rng);
    x.normalize();
    ++drawn;
    const bool ok =
        count == 0 || (accepted.topRows(count) * x).maxCoeff() <= max_inner;
    if (ok) {
      accepted.row(count++) = x.transpose();
      rejected_in_a_row = 0;
    } else {
      ++rejected_in_a_row;
    }
  }
  PackingResult result;
  result.set.kind = VectorKind::packing;
  result.set.eps = eps;
  result.set.vectors = accepted.topRows(count);
  result.target = target_n;
  result.samples_drawn = drawn;
  return result;
}

std::optional<MarginSearch> max_feasible_packing(int dim, std::size_t target_n,
                                                 std::uint64_t seed,
                                                 std::uint64_t max_attempts, int iterations) {
  double lo = 1e-6;
  PackingResult best = greedy_packing(dim, lo, target_n, seed, max_attempts);
  if (!best.feasible()) return std::nullopt;
  double hi = 1.0;
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    PackingResult trial = greedy_packing(dim, mid, target_n, seed, max_attempts);
    if (trial.feasible()) {
      lo = mid;
      best = std::move(trial);
    } else {
      hi = mid;
    }
  }
  return MarginSearch{lo, lo / 8.0, std::move(best.set)};
}

double separator_value(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q,
                       double eps) {
  return q.dot(p) - (1.0 - eps / 4.0);
}

}  // namespace linlb
