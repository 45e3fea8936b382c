#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include <catch2/catch_amalgamated.hpp>

#include "fairmatch/metrics.hpp"
#include "fairmatch/model.hpp"
#include "support/test_util.hpp"

using namespace fairmatch;

namespace {

FeatureMatrix make_matrix(const std::vector<std::vector<double>>& rows,
                          std::vector<std::string> names = {}) {
  FeatureMatrix m;
  m.rows = rows.size();
  m.cols = rows.empty() ? 0 : rows[0].size();
  if (names.empty())
    for (size_t c = 0; c < m.cols; ++c) names.push_back("x" + std::to_string(c));
  m.col_names = names;
  for (const auto& r : rows) {
    m.data.insert(m.data.end(), r.begin(), r.end());
    m.row_ids.push_back("");
  }
  return m;
}

FeatureMatrix random_matrix(size_t n, size_t d, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& r : rows)
    for (auto& v : r) v = rng.normal();
  return make_matrix(rows);
}

// Normal-equations oracle: dense Gaussian elimination with partial pivoting,
// written without Eigen so it stays independent of the implementation path.
std::vector<double> solve_normal_equations(const FeatureMatrix& X,
                                           const std::vector<double>& y, double lambda) {
  size_t d = X.cols, n = X.rows, m = d + 1;
  std::vector<std::vector<double>> A(m, std::vector<double>(m, 0.0));
  std::vector<double> b(m, 0.0);
  for (size_t r = 0; r < n; ++r) {
    const double* row = X.row(r);
    for (size_t i = 0; i < d; ++i) {
      for (size_t j = 0; j < d; ++j) A[i][j] += row[i] * row[j];
      A[i][d] += row[i];
      A[d][i] += row[i];
      b[i] += row[i] * y[r];
    }
    b[d] += y[r];
  }
  A[d][d] = static_cast<double>(n);
  for (size_t i = 0; i < d; ++i) A[i][i] += lambda;

  for (size_t col = 0; col < m; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < m; ++r)
      if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
    std::swap(A[col], A[pivot]);
    std::swap(b[col], b[pivot]);
    for (size_t r = col + 1; r < m; ++r) {
      double f = A[r][col] / A[col][col];
      for (size_t c = col; c < m; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> theta(m);
  for (size_t i = m; i-- > 0;) {
    double acc = b[i];
    for (size_t j = i + 1; j < m; ++j) acc -= A[i][j] * theta[j];
    theta[i] = acc / A[i][i];
  }
  return theta;
}

}  // namespace

TEST_CASE("linear fit recovers a noise-free line") {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 20; ++i) {
    double x = -2.0 + 0.2 * i;
    rows.push_back({x});
    y.push_back(2.0 * x + 1.0);
  }
  auto m = fit_linear(make_matrix(rows), y, 1e-8);
  REQUIRE_THAT(m.weights[0], Catch::Matchers::WithinAbs(2.0, 1e-6));
  REQUIRE_THAT(m.intercept, Catch::Matchers::WithinAbs(1.0, 1e-6));

  // predictions on training rows are exact up to the same tolerance
  auto scores = predict(m, make_matrix(rows));
  for (size_t i = 0; i < y.size(); ++i)
    REQUIRE_THAT(scores[i], Catch::Matchers::WithinAbs(y[i], 1e-6));
}

TEST_CASE("constant targets give zero slopes and mean intercept") {
  auto X = random_matrix(40, 4, 3);
  std::vector<double> y(40, 2.5);
  auto m = fit_linear(X, y, 1e-4);
  for (double w : m.weights) REQUIRE_THAT(w, Catch::Matchers::WithinAbs(0.0, 1e-9));
  REQUIRE_THAT(m.intercept, Catch::Matchers::WithinAbs(2.5, 1e-9));
}

TEST_CASE("linear fit matches the normal-equations oracle") {
  for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    auto X = random_matrix(50, 3, seed);
    Rng rng(seed + 100);
    std::vector<double> y(50);
    for (auto& v : y) v = rng.normal(1.0, 2.0);
    for (double lambda : {1e-8, 1e-2, 1.0}) {
      auto m = fit_linear(X, y, lambda);
      auto theta = solve_normal_equations(X, y, lambda);
      for (size_t i = 0; i < 3; ++i)
        REQUIRE_THAT(m.weights[i], Catch::Matchers::WithinRel(theta[i], 1e-8));
      REQUIRE_THAT(m.intercept, Catch::Matchers::WithinRel(theta[3], 1e-8));
    }
  }
}

TEST_CASE("ridge slopes shrink monotonically with lambda") {
  auto X = random_matrix(60, 5, 11);
  Rng rng(200);
  std::vector<double> y(60);
  for (size_t i = 0; i < y.size(); ++i) y[i] = X.at(i, 0) * 3.0 + rng.normal();
  double prev = 1e300;
  for (double lambda : {1e-6, 1e-3, 1e-1, 10.0, 1e4}) {
    auto m = fit_linear(X, y, lambda);
    double norm = 0;
    for (double w : m.weights) norm += w * w;
    REQUIRE(norm < prev + 1e-12);
    prev = norm;
  }
}

TEST_CASE("fit_linear rejects empty input") {
  REQUIRE_THROWS_AS(fit_linear(FeatureMatrix{}, {}, 1e-8), Error);
}

TEST_CASE("logistic separates linearly separable blobs") {
  Rng rng(5);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 300; ++i) {
    bool pos = i % 2;
    rows.push_back({rng.normal() + (pos ? 2.5 : -2.5), rng.normal() + (pos ? 2.5 : -2.5)});
    y.push_back(pos);
  }
  auto train = make_matrix({rows.begin(), rows.begin() + 200});
  auto test = make_matrix({rows.begin() + 200, rows.end()});
  Hyperparams hp;
  auto model = fit_classifier(train, {y.begin(), y.begin() + 200}, hp, 1);
  auto scores = predict(model, test);
  for (double s : scores) {
    REQUIRE(s >= 0.0);
    REQUIRE(s <= 1.0);
  }
  REQUIRE(auc(scores, {y.begin() + 200, y.end()}) >= 0.99);
}

TEST_CASE("labels independent of features give chance-level AUC") {
  Rng rng(6);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 600; ++i) {
    rows.push_back({rng.normal(), rng.normal(), rng.normal()});
    y.push_back(rng.bernoulli(0.5));
  }
  auto train = make_matrix({rows.begin(), rows.begin() + 400});
  auto test = make_matrix({rows.begin() + 400, rows.end()});
  auto model = fit_classifier(train, {y.begin(), y.begin() + 400}, Hyperparams{}, 2);
  double a = auc(predict(model, test), {y.begin() + 400, y.end()});
  REQUIRE(a >= 0.4);
  REQUIRE(a <= 0.6);
}

TEST_CASE("classifier gradient matches central finite differences") {
  for (int hidden : {0, 8}) {
    auto X = random_matrix(30, 4, 7 + hidden);
    Rng rng(50 + hidden);
    std::vector<int> y(30);
    for (auto& v : y) v = rng.bernoulli(0.5);
    y[0] = 0; y[1] = 1;  // both classes present

    ClassifierModel arch;
    arch.n_features = X.cols;
    arch.hidden = hidden;
    std::vector<double> params(arch.param_count());
    for (auto& p : params) p = rng.normal() * 0.5;

    std::vector<double> grad;
    double l2 = 1e-3;
    classifier_loss_grad(arch, params, X, y, l2, &grad);

    const double eps = 1e-5;
    for (size_t i = 0; i < params.size(); ++i) {
      auto shifted = params;
      shifted[i] = params[i] + eps;
      double up = classifier_loss_grad(arch, shifted, X, y, l2, nullptr);
      shifted[i] = params[i] - eps;
      double down = classifier_loss_grad(arch, shifted, X, y, l2, nullptr);
      double fd = (up - down) / (2 * eps);
      REQUIRE_THAT(grad[i], Catch::Matchers::WithinRel(fd, 1e-5) ||
                                Catch::Matchers::WithinAbs(fd, 1e-9));
    }
  }
}

TEST_CASE("classifier rejects single-class targets") {
  auto X = random_matrix(10, 2, 9);
  REQUIRE_THROWS_AS(fit_classifier(X, std::vector<int>(10, 1), Hyperparams{}, 1), Error);
}

TEST_CASE("a one-threshold dataset is solved by a single stump") {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 30; ++i) {
    rows.push_back({static_cast<double>(i), 0.0});
    y.push_back(i < 15 ? 0.0 : 1.0);
  }
  Hyperparams hp;
  hp.n_trees = 1;
  hp.max_depth = 1;
  hp.bootstrap = false;
  auto X = make_matrix(rows);
  auto model = fit_forest(X, y, hp, 1, /*classify=*/true);
  auto scores = predict(model, X);
  for (int i = 0; i < 30; ++i) REQUIRE(scores[i] == y[i]);
}

TEST_CASE("constant targets make every forest prediction that constant") {
  auto X = random_matrix(40, 3, 15);
  std::vector<double> y(40, 7.25);
  auto model = fit_forest(X, y, Hyperparams{}, 3, /*classify=*/false);
  for (double s : predict(model, X)) REQUIRE(s == 7.25);
}

namespace {

// Exhaustive split-search oracle for a depth-limited regression tree: tries
// every (feature, midpoint) candidate at every node.
struct OracleNode {
  int feature = -1;
  double threshold = 0;
  double value = 0;
  std::unique_ptr<OracleNode> left, right;
};

std::unique_ptr<OracleNode> oracle_tree(const FeatureMatrix& X, const std::vector<double>& y,
                                        std::vector<size_t> samples, int depth,
                                        int max_depth, int min_leaf) {
  auto node = std::make_unique<OracleNode>();
  double mean = 0;
  for (size_t s : samples) mean += y[s];
  mean /= samples.size();
  node->value = mean;

  bool pure = true;
  for (size_t s : samples)
    if (y[s] != y[samples[0]]) pure = false;
  if (pure || depth >= max_depth || samples.size() < 2 * static_cast<size_t>(min_leaf))
    return node;

  double best_sse = std::numeric_limits<double>::infinity();
  int best_f = -1;
  double best_thr = 0;
  for (size_t f = 0; f < X.cols; ++f) {
    std::vector<double> values;
    for (size_t s : samples) values.push_back(X.at(s, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (size_t i = 1; i < values.size(); ++i) {
      double thr = 0.5 * (values[i - 1] + values[i]);
      std::vector<size_t> l, r;
      for (size_t s : samples) (X.at(s, f) <= thr ? l : r).push_back(s);
      if (l.size() < static_cast<size_t>(min_leaf) || r.size() < static_cast<size_t>(min_leaf))
        continue;
      auto sse = [&](const std::vector<size_t>& part) {
        double sum = 0, sumsq = 0;
        for (size_t s : part) {
          sum += y[s];
          sumsq += y[s] * y[s];
        }
        return sumsq - sum * sum / part.size();
      };
      double total = sse(l) + sse(r);
      if (total < best_sse) {
        best_sse = total;
        best_f = static_cast<int>(f);
        best_thr = thr;
      }
    }
  }
  if (best_f < 0) return node;
  node->feature = best_f;
  node->threshold = best_thr;
  std::vector<size_t> l, r;
  for (size_t s : samples) (X.at(s, best_f) <= best_thr ? l : r).push_back(s);
  node->left = oracle_tree(X, y, l, depth + 1, max_depth, min_leaf);
  node->right = oracle_tree(X, y, r, depth + 1, max_depth, min_leaf);
  return node;
}

void compare_trees(const Tree& tree, int32_t node_id, const OracleNode* oracle) {
  const TreeNode& node = tree.nodes[node_id];
  REQUIRE(node.feature == oracle->feature);
  if (node.feature < 0) {
    REQUIRE_THAT(node.value, Catch::Matchers::WithinAbs(oracle->value, 1e-12));
    return;
  }
  REQUIRE_THAT(node.threshold, Catch::Matchers::WithinAbs(oracle->threshold, 1e-12));
  compare_trees(tree, node.left, oracle->left.get());
  compare_trees(tree, node.right, oracle->right.get());
}

}  // namespace

TEST_CASE("a depth-2 tree matches the exhaustive split oracle") {
  for (uint64_t seed : {4ULL, 5ULL, 6ULL}) {
    auto X = random_matrix(20, 3, seed);
    Rng rng(seed + 31);
    std::vector<double> y(20);
    for (auto& v : y) v = rng.normal();

    Hyperparams hp;
    hp.n_trees = 1;
    hp.max_depth = 2;
    hp.min_leaf = 1;
    hp.bootstrap = false;
    auto model = fit_forest(X, y, hp, seed, /*classify=*/false);

    std::vector<size_t> all(20);
    std::iota(all.begin(), all.end(), 0);
    auto oracle = oracle_tree(X, y, all, 0, 2, 1);
    compare_trees(model.trees[0], 0, oracle.get());
  }
}

TEST_CASE("forest prediction is the mean of its trees") {
  auto X = random_matrix(50, 4, 21);
  Rng rng(77);
  std::vector<double> y(50);
  for (auto& v : y) v = rng.normal();
  Hyperparams hp;
  hp.n_trees = 9;
  auto model = fit_forest(X, y, hp, 4, false);
  auto probe = random_matrix(10, 4, 22);
  auto combined = predict(model, probe);
  for (size_t r = 0; r < probe.rows; ++r) {
    double sum = 0;
    for (const auto& t : model.trees) sum += t.predict_row(probe.row(r));
    REQUIRE(combined[r] == sum / hp.n_trees);
  }
}

TEST_CASE("forest probabilities stay in [0,1] and training is thread-invariant") {
  auto records = testutil::random_records(200, 30, 0.0);
  auto policy = make_policy(records, false, false, BinningSpec{});
  fit_scalers(policy, records);
  auto X = encode(records, policy);
  std::vector<double> y(records.size());
  for (size_t i = 0; i < records.size(); ++i) y[i] = records[i].approved ? 1.0 : 0.0;

  Hyperparams hp;
  hp.n_trees = 12;
  hp.max_depth = 6;
  auto m1 = fit_forest(X, y, hp, 9, true, /*threads=*/1);
  auto m4 = fit_forest(X, y, hp, 9, true, /*threads=*/4);
  auto p1 = predict(m1, X);
  auto p4 = predict(m4, X);
  REQUIRE(p1 == p4);
  for (double p : p1) {
    REQUIRE(p >= 0.0);
    REQUIRE(p <= 1.0);
  }
}

TEST_CASE("model handles serialize and reload with identical predictions") {
  auto records = testutil::random_records(120, 41, 0.0);
  auto policy = make_policy(records, true, false, BinningSpec{});
  fit_scalers(policy, records);

  for (auto kind : {ModelKind::Linear, ModelKind::Classifier, ModelKind::Forest}) {
    Hyperparams hp;
    hp.n_trees = 5;
    hp.max_iter = 60;
    auto target = kind == ModelKind::Linear ? TargetLabel::InterestRate : TargetLabel::Approval;
    auto usable = records;
    if (target == TargetLabel::InterestRate) {
      usable.erase(std::remove_if(usable.begin(), usable.end(),
                                  [](const auto& r) { return !r.interest_rate; }),
                   usable.end());
    }
    auto handle = train_model(usable, policy, kind, hp, 77,
                              target == TargetLabel::Approval, target);
    auto restored = model_from_json(model_to_json(handle));
    auto a = predict_records(handle, usable);
    auto b = predict_records(restored, usable);
    REQUIRE(a == b);
  }
}

TEST_CASE("refitting with the same seed reproduces the handle exactly") {
  auto records = testutil::random_records(80, 43, 0.0);
  auto policy = make_policy(records, false, false, BinningSpec{});
  fit_scalers(policy, records);
  Hyperparams hp;
  hp.n_trees = 7;
  auto h1 = train_model(records, policy, ModelKind::Forest, hp, 5, true, TargetLabel::Approval);
  auto h2 = train_model(records, policy, ModelKind::Forest, hp, 5, true, TargetLabel::Approval);
  REQUIRE(model_to_json(h1).dump() == model_to_json(h2).dump());
}

TEST_CASE("predict rejects a mismatched column layout") {
  auto records = testutil::random_records(30, 47, 0.0);
  auto policy = make_policy(records, false, false, BinningSpec{});
  fit_scalers(policy, records);
  auto handle = train_model(records, policy, ModelKind::Linear, Hyperparams{}, 1, false,
                            TargetLabel::InterestRate);
  auto other = make_matrix({{1.0, 2.0}});
  REQUIRE_THROWS_AS(predict(handle, other), Error);
}

TEST_CASE("row permutation permutes predictions identically") {
  auto X = random_matrix(25, 3, 61);
  Rng rng(62);
  std::vector<double> y(25);
  for (auto& v : y) v = rng.normal();
  auto model = fit_forest(X, y, Hyperparams{}, 8, false);

  std::vector<size_t> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  Rng shuffler(63);
  std::vector<uint32_t> perm32(perm.begin(), perm.end());
  shuffler.shuffle(perm32);

  FeatureMatrix shuffled;
  shuffled.cols = X.cols;
  shuffled.col_names = X.col_names;
  shuffled.rows = X.rows;
  for (uint32_t p : perm32) {
    shuffled.data.insert(shuffled.data.end(), X.row(p), X.row(p) + X.cols);
    shuffled.row_ids.push_back("");
  }
  auto base = predict(model, X);
  auto permuted = predict(model, shuffled);
  for (size_t i = 0; i < perm32.size(); ++i) REQUIRE(permuted[i] == base[perm32[i]]);
}
