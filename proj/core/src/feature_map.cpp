#include <cmath>

#include "linlb/errors.hpp"
#include "linlb/features.hpp"

namespace linlb {

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::block: return "block";
    case FeatureKind::sign: return "sign";
    case FeatureKind::policy_lb: return "policy-lb";
    case FeatureKind::onehot: return "onehot";
  }
  return "block";
}

FeatureMap::FeatureMap(FeatureKind kind, int dim, int horizon,
                       std::shared_ptr<const VectorSet> backing, int padded_dim)
    : kind_(kind), dim_(dim), horizon_(horizon), backing_(std::move(backing)),
      padded_dim_(padded_dim) {}

FeatureMap FeatureMap::block(const VectorSet& jl, int horizon, int padded_dim) {
  if (jl.kind != VectorKind::jl) throw InvalidArgument("block features need a JL vector set");
  const TreeShape shape(horizon);
  if (jl.size() < shape.num_states()) {
    throw DimensionError("block features need one vector per state: have " +
                         std::to_string(jl.size()) + ", need " +
                         std::to_string(shape.num_states()));
  }
  const int natural = 2 * jl.dim();
  const int dim = std::max(natural, padded_dim);
  return FeatureMap(FeatureKind::block, dim, horizon, std::make_shared<VectorSet>(jl),
                    padded_dim > natural ? padded_dim : 0);
}

FeatureMap FeatureMap::sign(int horizon) {
  (void)TreeShape(horizon);
  return FeatureMap(FeatureKind::sign, 1, horizon, nullptr);
}

FeatureMap FeatureMap::policy_lb(const VectorSet& packing, int horizon) {
  if (packing.kind != VectorKind::packing) {
    throw InvalidArgument("policy-LB features need a packing vector set");
  }
  if (horizon % 2 != 0) throw ParityError("policy-LB features need an even horizon");
  if (packing.dim() != horizon / 2 - 1) {
    throw DimensionError("packing dimension must be H/2 - 1 = " +
                         std::to_string(horizon / 2 - 1) + ", got " +
                         std::to_string(packing.dim()));
  }
  const TreeShape shape(horizon);
  if (packing.size() < shape.num_states()) {
    throw DimensionError("policy-LB features need one packing point per state");
  }
  return FeatureMap(FeatureKind::policy_lb, horizon, horizon,
                    std::make_shared<VectorSet>(packing));
}

FeatureMap FeatureMap::onehot(int horizon) {
  const TreeShape shape(horizon);
  if (2 * shape.num_states() > static_cast<std::uint64_t>(kMaxOnehotDim)) {
    throw CapacityError("one-hot dimension exceeds " + std::to_string(kMaxOnehotDim));
  }
  return FeatureMap(FeatureKind::onehot, static_cast<int>(2 * shape.num_states()), horizon,
                    nullptr);
}

void FeatureMap::check_state(StateId s) const {
  if (s >= TreeShape(horizon_).num_states()) {
    throw IndexError("state " + std::to_string(s) + " outside feature map domain");
  }
}

Vector FeatureMap::operator()(StateId s, Action a) const {
  check_state(s);
  Vector phi = Vector::Zero(dim_);
  const auto i = static_cast<Eigen::Index>(s);
  switch (kind_) {
    case FeatureKind::block: {
      const Eigen::Index m = backing_->dim();
      phi.segment(a == Action::A1 ? 0 : m, m) = backing_->vectors.row(i).transpose();
      break;
    }
    case FeatureKind::sign:
      phi(0) = a == Action::A1 ? 1.0 : -1.0;
      break;
    case FeatureKind::policy_lb: {
      const Eigen::Index half = horizon_ / 2;
      const Eigen::Index offset = a == Action::A1 ? half : 0;
      const double scale = 1.0 / std::sqrt(2.0);
      phi.segment(offset, half - 1) = scale * backing_->vectors.row(i).transpose();
      phi(offset + half - 1) = scale;
      break;
    }
    case FeatureKind::onehot:
      phi(2 * i + action_index(a)) = 1.0;
      break;
  }
  return phi;
}

double FeatureMap::dot(const Eigen::Ref<const Vector>& theta, StateId s, Action a) const {
  if (theta.size() != dim_) throw DimensionError("coefficient dimension mismatch");
  check_state(s);
  const auto i = static_cast<Eigen::Index>(s);
  switch (kind_) {
    case FeatureKind::block: {
      const Eigen::Index m = backing_->dim();
      return theta.segment(a == Action::A1 ? 0 : m, m).dot(backing_->vectors.row(i).transpose());
    }
    case FeatureKind::sign:
      return a == Action::A1 ? theta(0) : -theta(0);
    case FeatureKind::policy_lb: {
      const Eigen::Index half = horizon_ / 2;
      const Eigen::Index offset = a == Action::A1 ? half : 0;
      const double lifted =
          theta.segment(offset, half - 1).dot(backing_->vectors.row(i).transpose()) +
          theta(offset + half - 1);
      return lifted / std::sqrt(2.0);
    }
    case FeatureKind::onehot:
      return theta(2 * i + action_index(a));
  }
  return 0.0;
}

RowMatrix FeatureMap::level_matrix(int level) const {
  const TreeShape shape(horizon_);
  if (level < 0 || level >= horizon_) throw IndexError("level out of range");
  const StateId first = shape.first_of_level(level);
  const auto count = static_cast<Eigen::Index>(shape.level_size(level));
  RowMatrix out = RowMatrix::Zero(2 * count, dim_);
  for (Eigen::Index k = 0; k < count; ++k) {
    for (Action a : kActions) {
      out.row(2 * k + action_index(a)) = (*this)(first + static_cast<StateId>(k), a).transpose();
    }
  }
  return out;
}

}  // namespace linlb
