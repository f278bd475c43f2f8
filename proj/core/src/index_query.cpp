#include <numeric>

#include "linlb/errors.hpp"
#include "linlb/oracle.hpp"

namespace linlb {
namespace {

class SweepSolver final : public IndexSolver {
 public:
  explicit SweepSolver(bool reverse) : reverse_(reverse) {}
  std::string name() const override { return reverse_ ? "reverse" : "sweep"; }
  void reset(std::uint64_t n, std::uint64_t) override {
    n_ = n;
    k_ = 0;
  }
  std::optional<std::uint64_t> next_guess() override {
    if (k_ >= n_) return std::nullopt;
    const std::uint64_t g = reverse_ ? n_ - 1 - k_ : k_;
    ++k_;
    return g;
  }

 private:
  bool reverse_;
  std::uint64_t n_ = 0, k_ = 0;
};

// Fresh uniformly random order over [0, n), drawn lazily.
class UniformSolver final : public IndexSolver {
 public:
  std::string name() const override { return "uniform"; }
  void reset(std::uint64_t n, std::uint64_t seed) override {
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::uint64_t{0});
    rng_ = make_rng(seed, 0x1d9);
    k_ = 0;
  }
  std::optional<std::uint64_t> next_guess() override {
    if (k_ >= order_.size()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(k_, order_.size() - 1);
    std::swap(order_[k_], order_[pick(rng_)]);
    return order_[k_++];
  }

 private:
  std::vector<std::uint64_t> order_;
  std::size_t k_ = 0;
  Rng rng_;
};

// Visits k * stride mod n for a stride coprime to n picked from the seed.
class StrideSolver final : public IndexSolver {
 public:
  std::string name() const override { return "stride"; }
  void reset(std::uint64_t n, std::uint64_t seed) override {
    n_ = n;
    k_ = 0;
    stride_ = 1;
    if (n > 2) {
      Rng rng = make_rng(seed, 0x57);
      std::uniform_int_distribution<std::uint64_t> pick(1, n - 1);
      do stride_ = pick(rng);
      while (std::gcd(stride_, n) != 1);
    }
  }
  std::optional<std::uint64_t> next_guess() override {
    if (k_ >= n_) return std::nullopt;
    const std::uint64_t g = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(k_) * stride_) % n_);
    ++k_;
    return g;
  }

 private:
  std::uint64_t n_ = 0, k_ = 0, stride_ = 1;
};

class NeverSolver final : public IndexSolver {
 public:
  std::string name() const override { return "never"; }
  void reset(std::uint64_t, std::uint64_t) override {}
  std::optional<std::uint64_t> next_guess() override { return std::nullopt; }
};

}  // namespace

std::unique_ptr<IndexSolver> make_index_solver(std::string_view name) {
  if (name == "sweep") return std::make_unique<SweepSolver>(false);
  if (name == "reverse") return std::make_unique<SweepSolver>(true);
  if (name == "uniform") return std::make_unique<UniformSolver>();
  if (name == "stride") return std::make_unique<StrideSolver>();
  if (name == "never") return std::make_unique<NeverSolver>();
  throw InvalidArgument("unknown index solver '" + std::string(name) + "'");
}

IndqResult indq_run(IndexSolver& solver, std::uint64_t n, std::uint64_t istar,
                    std::uint64_t query_budget, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("index range must be non-empty");
  if (istar >= n) throw IndexError("hidden index out of range");
  solver.reset(n, seed);
  IndqResult r;
  while (r.queries < query_budget) {
    const auto g = solver.next_guess();
    if (!g) break;
    ++r.queries;
    if (*g == istar) {
      r.found = true;
      break;
    }
  }
  return r;
}

}  // namespace linlb
