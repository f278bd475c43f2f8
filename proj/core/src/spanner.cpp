#include <cmath>

#include "linlb/errors.hpp"
#include "linlb/learners.hpp"

namespace linlb {
namespace {

constexpr double kRankThreshold = 1e-10;
constexpr int kMaxSwaps = 100000;

struct SpanCoords {
  Eigen::MatrixXd U;  // d x r orthonormal
  Eigen::MatrixXd Y;  // r x n coordinates of the inputs
};

SpanCoords span_coordinates(const RowMatrix& vectors) {
  if (vectors.rows() == 0) throw InvalidArgument("spanner needs a non-empty vector list");
  const Eigen::MatrixXd X = vectors.transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(kRankThreshold);
  const Eigen::Index r = qr.rank();
  SpanCoords out;
  out.U = qr.householderQ() * Eigen::MatrixXd::Identity(X.rows(), r);
  out.Y = out.U.transpose() * X;
  return out;
}

void check_C(double C) {
  if (!(C >= 1.0 + 1e-6)) throw InvalidArgument("spanner factor C must be at least 1 + 1e-6");
}

Spanner assemble(const RowMatrix& vectors, SpanCoords coords, std::vector<std::size_t> chosen,
                 double C) {
  Spanner sp;
  sp.C = C;
  const auto r = static_cast<Eigen::Index>(chosen.size());
  sp.basis.resize(vectors.cols(), r);
  Eigen::MatrixXd B(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto j = static_cast<Eigen::Index>(chosen[static_cast<std::size_t>(i)]);
    sp.basis.col(i) = vectors.row(j).transpose();
    B.col(i) = coords.Y.col(j);
  }
  sp.indices = std::move(chosen);
  sp.span_basis = std::move(coords.U);
  if (r > 0) sp.coords_lu.compute(B);
  return sp;
}

}  // namespace

Spanner barycentric_spanner(const RowMatrix& vectors, double C) {
  check_C(C);
  SpanCoords coords = span_coordinates(vectors);
  const Eigen::Index r = coords.Y.rows();
  const Eigen::Index n = coords.Y.cols();

  // Greedy volume: repeatedly take the input with the largest component
  // orthogonal to what has been chosen. Near-ties go to the lowest index.
  std::vector<std::size_t> chosen;
  Eigen::MatrixXd R = coords.Y;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < r; ++i) {
    const Eigen::VectorXd norms = R.colwise().norm();
    double best = -1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!used[static_cast<std::size_t>(j)]) best = std::max(best, norms(j));
    }
    Eigen::Index pick = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!used[static_cast<std::size_t>(j)] && norms(j) >= best * (1.0 - 1e-12)) {
        pick = j;
        break;
      }
    }
    used[static_cast<std::size_t>(pick)] = true;
    chosen.push_back(static_cast<std::size_t>(pick));
    const Eigen::VectorXd q = R.col(pick) / norms(pick);
    R -= q * (q.transpose() * R);
  }

  // Each swap grows |det| by more than C, so this terminates.
  for (int it = 0; r > 0 && it < kMaxSwaps; ++it) {
    Eigen::MatrixXd B(r, r);
    for (Eigen::Index i = 0; i < r; ++i) B.col(i) = coords.Y.col(static_cast<Eigen::Index>(chosen[i]));
    const Eigen::MatrixXd coeffs = Eigen::PartialPivLU<Eigen::MatrixXd>(B).solve(coords.Y);
    Eigen::Index bi = 0, bj = 0;
    const double worst = coeffs.cwiseAbs().maxCoeff(&bi, &bj);
    if (worst <= C) break;
    chosen[static_cast<std::size_t>(bi)] = static_cast<std::size_t>(bj);
  }
  return assemble(vectors, std::move(coords), std::move(chosen), C);
}

Spanner spanner_from_indices(const RowMatrix& vectors, std::vector<std::size_t> indices,
                             double C) {
  check_C(C);
  SpanCoords coords = span_coordinates(vectors);
  if (static_cast<Eigen::Index>(indices.size()) != coords.Y.rows()) {
    throw SpanError("spanner size must equal the rank of the input list");
  }
  for (std::size_t i : indices) {
    if (i >= static_cast<std::size_t>(vectors.rows())) throw IndexError("spanner index out of range");
  }
  Spanner sp = assemble(vectors, std::move(coords), std::move(indices), C);
  if (sp.rank() > 0 && std::abs(sp.coords_lu.determinant()) < kRankThreshold) {
    throw SpanError("chosen spanner vectors are linearly dependent");
  }
  return sp;
}

Vector spanner_coefficients(const Eigen::Ref<const Vector>& v, const Spanner& sp) {
  if (v.size() != sp.span_basis.rows()) throw DimensionError("vector dimension mismatch");
  const Eigen::VectorXd coords = sp.span_basis.transpose() * v;
  const double residual = (v - sp.span_basis * coords).norm();
  if (residual > kSpanResidualTolerance) {
    throw SpanError("vector lies outside the spanner's span (residual " +
                    std::to_string(residual) + ")");
  }
  if (sp.rank() == 0) return Vector::Zero(0);
  return sp.coords_lu.solve(coords);
}

Eigen::MatrixXd spanner_coefficients_all(const RowMatrix& vectors, const Spanner& sp) {
  if (vectors.cols() != sp.span_basis.rows()) throw DimensionError("vector dimension mismatch");
  const Eigen::MatrixXd X = vectors.transpose();
  const Eigen::MatrixXd coords = sp.span_basis.transpose() * X;
  const Eigen::VectorXd residual = (X - sp.span_basis * coords).colwise().norm();
  if (residual.size() > 0 && residual.maxCoeff() > kSpanResidualTolerance) {
    throw SpanError("vector lies outside the spanner's span");
  }
  if (sp.rank() == 0) return Eigen::MatrixXd::Zero(0, vectors.rows());
  return sp.coords_lu.solve(coords);
}

}  // namespace linlb
