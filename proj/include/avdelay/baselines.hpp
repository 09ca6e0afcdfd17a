#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "avdelay/checkpoint.hpp"
#include "avdelay/optim.hpp"
#include "avdelay/parallel.hpp"
#include "avdelay/rng.hpp"

// Reference regressors. Each consumes a design matrix with one flattened
// window per row.
namespace avdelay::baselines {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using MatRef = Eigen::Ref<const Mat>;

// ---- linear regression -----------------------------------------------------

struct LinearModel {
  Vec w;
  double b = 0.0;
  double ridge_lambda = 0.0;

  std::vector<double> predict(MatRef x) const;
};

// Minimizes |Xw + b - y|^2 + lambda |w|^2 with an unpenalized intercept. Uses
// the p x p normal equations, or the n x n kernel form when p > n. Throws
// ConditioningError when lambda is 0 and the system is singular.
LinearModel linreg_fit(MatRef x, std::span<const double> y, double ridge_lambda = 1e-8);

// ---- regression tree -------------------------------------------------------

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  double value = 0.0;
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict_one(std::span<const double> row) const;
  std::vector<double> predict(MatRef x) const;
  int depth() const;
  std::size_t leaf_count() const;
  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct TreeConfig {
  int max_depth = 8;
  std::size_t min_leaf = 5;
  std::size_t mtry = 0;  // features examined per split; 0 means all
};

// Greedy CART on squared error. A split goes left when x[f] <= threshold;
// thresholds are midpoints between consecutive distinct values. Ties keep
// the lowest feature index, then the lowest threshold.
RegressionTree tree_fit(MatRef x, std::span<const double> y, const TreeConfig& cfg);

// Fits on the given row multiset (duplicates allowed); `rng` drives feature
// subsampling when cfg.mtry is set.
RegressionTree tree_fit_rows(MatRef x, std::span<const double> y, std::span<const std::size_t> rows,
                             const TreeConfig& cfg, Rng* rng);

// ---- bagged forest ---------------------------------------------------------

struct ForestConfig {
  std::size_t n_trees = 50;
  TreeConfig tree{8, 5, 0};  // mtry 0 here means max(1, p/3)
  bool bootstrap = true;
  std::uint64_t seed = 1;
};

struct Forest {
  std::vector<RegressionTree> trees;
  std::vector<double> predict(MatRef x) const;
  friend bool operator==(const Forest&, const Forest&) = default;
};

// Tree k draws from Rng(seed).split(k), so the result does not depend on
// the execution policy.
Forest forest_fit(MatRef x, std::span<const double> y, const ForestConfig& cfg, Exec exec = Exec::Parallel);

// ---- multilayer perceptron -------------------------------------------------

struct MlpConfig {
  std::size_t inputs = 1;
  std::size_t hidden = 64;
};

// y = w2 . tanh(W1 x + b1) + b2. Flat layout: W1 (row-major), b1, w2, b2.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(const MlpConfig& cfg);

  const MlpConfig& config() const { return cfg_; }
  Vec& params() { return theta_; }
  const Vec& params() const { return theta_; }
  void initialize(std::uint64_t seed);

  // Outputs in standardized target units.
  Vec forward(MatRef x) const;
  // Mean squared error over rows against `targets` and its gradient.
  double loss_gradient(MatRef x, std::span<const double> targets, Vec* grad) const;

  std::vector<double> predict(MatRef x) const;

  double target_mean = 0.0;
  double target_scale = 1.0;

 private:
  MlpConfig cfg_;
  Vec theta_;
};

std::vector<double> mlp_fit(Mlp& model, MatRef x, std::span<const double> y, const optim::TrainConfig& cfg);

// ---- checkpoints -----------------------------------------------------------

Checkpoint to_checkpoint(const LinearModel& m);
Checkpoint to_checkpoint(const RegressionTree& t);
Checkpoint to_checkpoint(const Forest& f);
Checkpoint to_checkpoint(const Mlp& m);
LinearModel linear_from_checkpoint(const Checkpoint& ck);
RegressionTree tree_from_checkpoint(const Checkpoint& ck);
Forest forest_from_checkpoint(const Checkpoint& ck);
Mlp mlp_from_checkpoint(const Checkpoint& ck);

}  // namespace avdelay::baselines
