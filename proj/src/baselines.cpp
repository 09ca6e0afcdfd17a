#include "avdelay/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <Eigen/Cholesky>

#include "avdelay/error.hpp"

namespace avdelay::baselines {
namespace {

using Index = Eigen::Index;

void check_xy(MatRef x, std::span<const double> y) {
  if (x.rows() == 0) throw InvalidInput("design matrix has no rows");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw InvalidInput("row count and target length differ");
  if (!x.allFinite()) throw NumericError("non-finite values in design matrix");
}

// Solves A z = r for symmetric positive semi-definite A. A pivot below the
// relative floor means A is numerically singular.
Vec solve_spd(const Mat& a, const Vec& r, bool allow_singular) {
  Eigen::LDLT<Mat> ldlt(a);
  const Vec d = ldlt.vectorD().cwiseAbs();
  const double dmax = d.size() ? d.maxCoeff() : 0.0;
  if (ldlt.info() != Eigen::Success || (!allow_singular && (dmax == 0.0 || d.minCoeff() <= 1e-12 * dmax))) {
    throw ConditioningError("normal equations are singular; use ridge_lambda > 0");
  }
  return ldlt.solve(r);
}

}  // namespace

// ---- linear regression -----------------------------------------------------

std::vector<double> LinearModel::predict(MatRef x) const {
  if (x.cols() != w.size()) throw InvalidInput("feature width does not match the linear model");
  const Vec out = (x * w).array() + b;
  return {out.data(), out.data() + out.size()};
}

LinearModel linreg_fit(MatRef x, std::span<const double> y, double ridge_lambda) {
  check_xy(x, y);
  if (!(ridge_lambda >= 0.0)) throw InvalidInput("ridge_lambda must be nonnegative");
  const Index n = x.rows(), p = x.cols();
  const Eigen::Map<const Vec> yv(y.data(), n);
  const Eigen::RowVectorXd xmean = x.colwise().mean();
  const double ymean = yv.mean();
  const Mat xc = x.rowwise() - xmean;
  const Vec yc = yv.array() - ymean;

  LinearModel m;
  m.ridge_lambda = ridge_lambda;
  const bool allow_singular = ridge_lambda > 0.0;
  if (p <= n) {
    Mat a = Mat::Zero(p, p);
    a.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose());
    a = a.selfadjointView<Eigen::Lower>();
    a.diagonal().array() += ridge_lambda;
    m.w = solve_spd(a, xc.transpose() * yc, allow_singular);
  } else {
    Mat k = Mat::Zero(n, n);
    k.selfadjointView<Eigen::Lower>().rankUpdate(xc);
    k = k.selfadjointView<Eigen::Lower>();
    k.diagonal().array() += ridge_lambda;
    m.w = xc.transpose() * solve_spd(k, yc, allow_singular);
  }
  m.b = ymean - xmean.dot(m.w);
  if (!m.w.allFinite() || !std::isfinite(m.b)) throw ConditioningError("linear solve produced non-finite weights");
  return m;
}

// ---- regression tree -------------------------------------------------------

double RegressionTree::predict_one(std::span<const double> row) const {
  if (nodes.empty()) throw StateError("tree is empty");
  int k = 0;
  while (nodes[k].feature >= 0) {
    const auto& nd = nodes[k];
    k = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[k].value;
}

std::vector<double> RegressionTree::predict(MatRef x) const {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Index r = 0; r < x.rows(); ++r) out[static_cast<std::size_t>(r)] = predict_one({x.row(r).data(), static_cast<std::size_t>(x.cols())});
  return out;
}

int RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::function<int(int)> rec = [&](int k) -> int {
    if (nodes[k].feature < 0) return 0;
    return 1 + std::max(rec(nodes[k].left), rec(nodes[k].right));
  };
  return rec(0);
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(MatRef x, std::span<const double> y, const TreeConfig& cfg, Rng* rng)
      : x_(x), y_(y), cfg_(cfg), rng_(rng) {
    features_.resize(static_cast<std::size_t>(x.cols()));
    std::iota(features_.begin(), features_.end(), 0);
  }

  int build(std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double mean = 0.0;
    for (auto r : rows) mean += y_[r];
    mean /= static_cast<double>(rows.size());
    tree.nodes[id].value = mean;
    if (depth >= cfg_.max_depth || rows.size() < 2 * std::max<std::size_t>(cfg_.min_leaf, 1)) return id;

    double parent_sse = 0.0;
    for (auto r : rows) parent_sse += (y_[r] - mean) * (y_[r] - mean);
    if (!(parent_sse > 0.0)) return id;

    int best_f = -1;
    double best_thr = 0.0;
    double best = parent_sse * (1.0 - 1e-12);
    const double tol = 1e-12 * parent_sse;
    std::vector<std::pair<double, double>> col(rows.size());
    for (int f : candidates()) {
      for (std::size_t k = 0; k < rows.size(); ++k) col[k] = {x_(static_cast<Index>(rows[k]), f), y_[rows[k]] - mean};
      std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      double total = 0.0, total_sq = 0.0;
      for (const auto& [v, t] : col) {
        total += t;
        total_sq += t * t;
      }
      double s = 0.0, sq = 0.0;
      const std::size_t n = col.size();
      const std::size_t lo = std::max<std::size_t>(cfg_.min_leaf, 1);
      for (std::size_t k = 1; k < n; ++k) {
        s += col[k - 1].second;
        sq += col[k - 1].second * col[k - 1].second;
        if (k < lo || n - k < lo) continue;
        if (!(col[k - 1].first < col[k].first)) continue;
        const double nl = static_cast<double>(k), nr = static_cast<double>(n - k);
        const double sr = total - s, sqr = total_sq - sq;
        const double score = (sq - s * s / nl) + (sqr - sr * sr / nr);
        if (score < best - tol) {
          best = score;
          best_f = f;
          const double a = col[k - 1].first, b = col[k].first;
          double mid = a + (b - a) / 2.0;
          if (!(mid < b)) mid = a;
          best_thr = mid;
        }
      }
    }
    if (best_f < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) (x_(static_cast<Index>(r), best_f) <= best_thr ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    tree.nodes[id].feature = best_f;
    tree.nodes[id].threshold = best_thr;
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }

  RegressionTree tree;

 private:
  // Ascending feature indices so the tie-break is by lowest index.
  std::vector<int> candidates() {
    const std::size_t p = features_.size();
    if (cfg_.mtry == 0 || cfg_.mtry >= p || rng_ == nullptr) return features_;
    std::vector<int> pool = features_;
    for (std::size_t k = 0; k < cfg_.mtry; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng_->below(p - k));
      std::swap(pool[k], pool[j]);
    }
    pool.resize(cfg_.mtry);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  MatRef x_;
  std::span<const double> y_;
  TreeConfig cfg_;
  Rng* rng_;
  std::vector<int> features_;
};

}  // namespace

RegressionTree tree_fit_rows(MatRef x, std::span<const double> y, std::span<const std::size_t> rows,
                             const TreeConfig& cfg, Rng* rng) {
  check_xy(x, y);
  if (rows.empty()) throw InvalidInput("tree_fit: no rows");
  if (cfg.max_depth < 0) throw ConfigError("max_depth must be nonnegative");
  TreeBuilder b(x, y, cfg, rng);
  std::vector<std::size_t> r(rows.begin(), rows.end());
  b.build(r, 0);
  return std::move(b.tree);
}

RegressionTree tree_fit(MatRef x, std::span<const double> y, const TreeConfig& cfg) {
  if (static_cast<std::size_t>(x.rows()) < cfg.min_leaf) throw InvalidInput("fewer rows than min_leaf");
  std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  return tree_fit_rows(x, y, rows, cfg, nullptr);
}

// ---- forest ----------------------------------------------------------------

std::vector<double> Forest::predict(MatRef x) const {
  if (trees.empty()) throw StateError("forest has no trees");
  std::vector<double> out(static_cast<std::size_t>(x.rows()), 0.0);
  for (const auto& t : trees) {
    const auto p = t.predict(x);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += p[k];
  }
  for (auto& v : out) v /= static_cast<double>(trees.size());
  return out;
}

Forest forest_fit(MatRef x, std::span<const double> y, const ForestConfig& cfg, Exec exec) {
  check_xy(x, y);
  if (cfg.n_trees == 0) throw ConfigError("n_trees must be positive");
  const auto n = static_cast<std::size_t>(x.rows());
  TreeConfig tc = cfg.tree;
  if (tc.mtry == 0) tc.mtry = std::max<std::size_t>(1, static_cast<std::size_t>(x.cols()) / 3);

  Forest f;
  f.trees.resize(cfg.n_trees);
  auto grow = [&](std::ptrdiff_t k) {
    Rng rng = Rng(cfg.seed).split(static_cast<std::uint64_t>(k));
    std::vector<std::size_t> rows(n);
    if (cfg.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    f.trees[static_cast<std::size_t>(k)] = tree_fit_rows(x, y, rows, tc, &rng);
  };
  const auto T = static_cast<std::ptrdiff_t>(cfg.n_trees);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < T; ++k) grow(k);
  } else {
    for (std::ptrdiff_t k = 0; k < T; ++k) grow(k);
  }
  return f;
}

// ---- MLP -------------------------------------------------------------------

Mlp::Mlp(const MlpConfig& cfg) : cfg_(cfg) {
  if (cfg_.inputs == 0 || cfg_.hidden == 0) throw ConfigError("MLP sizes must be positive");
  theta_ = Vec::Zero(static_cast<Index>(cfg_.hidden * cfg_.inputs + 2 * cfg_.hidden + 1));
}

void Mlp::initialize(std::uint64_t seed) {
  Rng rng = Rng(seed).split(0);
  const std::size_t H = cfg_.hidden, P = cfg_.inputs;
  const double b1 = 1.0 / std::sqrt(static_cast<double>(P));
  const double b2 = 1.0 / std::sqrt(static_cast<double>(H));
  theta_.setZero();
  for (std::size_t k = 0; k < H * P; ++k) theta_[static_cast<Index>(k)] = rng.uniform(-b1, b1);
  for (std::size_t k = 0; k < H; ++k) theta_[static_cast<Index>(H * P + H + k)] = rng.uniform(-b2, b2);
}

Vec Mlp::forward(MatRef x) const {
  const auto H = static_cast<Index>(cfg_.hidden), P = static_cast<Index>(cfg_.inputs);
  if (x.cols() != P) throw InvalidInput("feature width does not match the MLP");
  const Eigen::Map<const Mat> W1(theta_.data(), H, P);
  const Eigen::Map<const Vec> b1(theta_.data() + H * P, H);
  const Eigen::Map<const Vec> w2(theta_.data() + H * P + H, H);
  const double b2 = theta_[theta_.size() - 1];
  Mat a = x * W1.transpose();
  a.rowwise() += b1.transpose();
  a = a.array().tanh();
  return (a * w2).array() + b2;
}

double Mlp::loss_gradient(MatRef x, std::span<const double> targets, Vec* grad) const {
  const auto H = static_cast<Index>(cfg_.hidden), P = static_cast<Index>(cfg_.inputs);
  if (x.cols() != P) throw InvalidInput("feature width does not match the MLP");
  if (x.rows() == 0 || static_cast<std::size_t>(x.rows()) != targets.size()) throw InvalidInput("bad MLP batch");
  const Eigen::Map<const Mat> W1(theta_.data(), H, P);
  const Eigen::Map<const Vec> b1(theta_.data() + H * P, H);
  const Eigen::Map<const Vec> w2(theta_.data() + H * P + H, H);
  const double b2 = theta_[theta_.size() - 1];
  Mat a = x * W1.transpose();
  a.rowwise() += b1.transpose();
  a = a.array().tanh();
  const Vec out = (a * w2).array() + b2;
  const Vec err = out - Eigen::Map<const Vec>(targets.data(), x.rows());
  const double n = static_cast<double>(x.rows());
  const double loss = err.squaredNorm() / n;
  if (grad) {
    grad->setZero(theta_.size());
    const Vec dout = 2.0 / n * err;
    const Mat dpre = (dout * w2.transpose()).cwiseProduct((1.0 - a.array().square()).matrix());
    Eigen::Map<Mat>(grad->data(), H, P).noalias() = dpre.transpose() * x;
    grad->segment(H * P, H) = dpre.colwise().sum().transpose();
    grad->segment(H * P + H, H).noalias() = a.transpose() * dout;
    (*grad)[grad->size() - 1] = dout.sum();
  }
  return loss;
}

std::vector<double> Mlp::predict(MatRef x) const {
  const Vec z = forward(x);
  std::vector<double> out(static_cast<std::size_t>(z.size()));
  for (Index k = 0; k < z.size(); ++k) out[static_cast<std::size_t>(k)] = z[k] * target_scale + target_mean;
  return out;
}

std::vector<double> mlp_fit(Mlp& model, MatRef x, std::span<const double> y, const optim::TrainConfig& cfg) {
  check_xy(x, y);
  const auto n = static_cast<std::size_t>(x.rows());
  double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  model.target_mean = mean;
  model.target_scale = sd > 1e-12 ? sd : 1.0;
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = (y[k] - mean) / model.target_scale;

  Mat xb;
  std::vector<double> tb;
  auto batch_fn = [&](std::span<const std::size_t> batch, Rng&) {
    xb.resize(static_cast<Index>(batch.size()), x.cols());
    tb.resize(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
      xb.row(static_cast<Index>(k)) = x.row(static_cast<Index>(batch[k]));
      tb[k] = t[batch[k]];
    }
    optim::BatchEval e;
    e.loss = model.loss_gradient(xb, tb, &e.grad);
    return e;
  };
  return optim::train_loop(model.params(), n, cfg, batch_fn);
}

// ---- checkpoints -----------------------------------------------------------

namespace {

void require_kind(const Checkpoint& ck, const char* kind) {
  if (ck.kind != kind) throw SchemaError("checkpoint holds a '" + ck.kind + "' model, not " + kind);
}

void append_tree(std::vector<double>& out, const RegressionTree& t) {
  for (const auto& n : t.nodes) {
    out.insert(out.end(), {static_cast<double>(n.feature), n.threshold, static_cast<double>(n.left),
                           static_cast<double>(n.right), n.value});
  }
}

RegressionTree read_tree(std::span<const double> p, std::size_t count) {
  RegressionTree t;
  t.nodes.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double* q = p.data() + 5 * k;
    t.nodes[k] = {static_cast<int>(q[0]), q[1], static_cast<int>(q[2]), static_cast<int>(q[3]), q[4]};
    const auto& n = t.nodes[k];
    if (n.feature >= 0 && (n.left <= static_cast<int>(k) || n.right <= static_cast<int>(k) ||
                           n.left >= static_cast<int>(count) || n.right >= static_cast<int>(count))) {
      throw SchemaError("corrupt tree topology in checkpoint");
    }
  }
  if (count == 0) throw SchemaError("empty tree in checkpoint");
  return t;
}

}  // namespace

Checkpoint to_checkpoint(const LinearModel& m) {
  Checkpoint ck;
  ck.kind = "lr";
  ck.params.assign(m.w.data(), m.w.data() + m.w.size());
  ck.params.push_back(m.b);
  ck.config = {{"inputs", m.w.size()}, {"ridge_lambda", m.ridge_lambda}};
  return ck;
}

LinearModel linear_from_checkpoint(const Checkpoint& ck) {
  require_kind(ck, "lr");
  const auto p = ck.config.at("inputs").get<std::size_t>();
  if (ck.params.size() != p + 1) throw SchemaError("linear checkpoint size mismatch");
  LinearModel m;
  m.w = Eigen::Map<const Vec>(ck.params.data(), static_cast<Index>(p));
  m.b = ck.params.back();
  m.ridge_lambda = ck.config.at("ridge_lambda").get<double>();
  return m;
}

Checkpoint to_checkpoint(const RegressionTree& t) {
  Checkpoint ck;
  ck.kind = "rt";
  append_tree(ck.params, t);
  ck.config = {{"nodes", t.nodes.size()}};
  return ck;
}

RegressionTree tree_from_checkpoint(const Checkpoint& ck) {
  require_kind(ck, "rt");
  const auto count = ck.config.at("nodes").get<std::size_t>();
  if (ck.params.size() != 5 * count) throw SchemaError("tree checkpoint size mismatch");
  return read_tree(ck.params, count);
}

Checkpoint to_checkpoint(const Forest& f) {
  Checkpoint ck;
  ck.kind = "rf";
  std::vector<std::size_t> sizes;
  for (const auto& t : f.trees) {
    append_tree(ck.params, t);
    sizes.push_back(t.nodes.size());
  }
  ck.config = {{"tree_nodes", sizes}};
  return ck;
}

Forest forest_from_checkpoint(const Checkpoint& ck) {
  require_kind(ck, "rf");
  const auto sizes = ck.config.at("tree_nodes").get<std::vector<std::size_t>>();
  Forest f;
  std::size_t off = 0;
  for (auto s : sizes) {
    if ((off + s) * 5 > ck.params.size()) throw SchemaError("forest checkpoint size mismatch");
    f.trees.push_back(read_tree(std::span<const double>(ck.params).subspan(off * 5, s * 5), s));
    off += s;
  }
  if (off * 5 != ck.params.size()) throw SchemaError("forest checkpoint size mismatch");
  return f;
}

Checkpoint to_checkpoint(const Mlp& m) {
  Checkpoint ck;
  ck.kind = "mlp";
  ck.params.assign(m.params().data(), m.params().data() + m.params().size());
  ck.config = {{"inputs", m.config().inputs},
               {"hidden", m.config().hidden},
               {"target_mean", m.target_mean},
               {"target_scale", m.target_scale}};
  return ck;
}

Mlp mlp_from_checkpoint(const Checkpoint& ck) {
  require_kind(ck, "mlp");
  Mlp m({ck.config.at("inputs").get<std::size_t>(), ck.config.at("hidden").get<std::size_t>()});
  if (ck.params.size() != static_cast<std::size_t>(m.params().size())) throw SchemaError("MLP checkpoint size mismatch");
  m.params() = Eigen::Map<const Vec>(ck.params.data(), static_cast<Index>(ck.params.size()));
  m.target_mean = ck.config.at("target_mean").get<double>();
  m.target_scale = ck.config.at("target_scale").get<double>();
  return m;
}

}  // namespace avdelay::baselines
