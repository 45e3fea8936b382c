#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fairmatch/error.hpp"
#include "fairmatch/features.hpp"
#include "fairmatch/hyperparams.hpp"
#include "fairmatch/rng.hpp"

namespace fairmatch {

inline double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// log(1 + e^z) without overflow
inline double log1pexp(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Probability-outputting classifier: logistic regression when hidden == 0,
// otherwise a one-hidden-layer tanh perceptron. Parameters are packed flat:
//   logistic: [w(d), b]
//   mlp:      [W1(d*h) row-per-unit, b1(h), w2(h), b2]
struct ClassifierModel {
  size_t n_features = 0;
  int hidden = 0;
  std::vector<double> params;

  size_t param_count() const {
    size_t d = n_features;
    size_t h = static_cast<size_t>(hidden);
    return hidden == 0 ? d + 1 : d * h + h + h + 1;
  }

  double raw_score(const double* row) const {
    size_t d = n_features;
    if (hidden == 0) {
      double z = params[d];
      for (size_t c = 0; c < d; ++c) z += params[c] * row[c];
      return z;
    }
    size_t h = static_cast<size_t>(hidden);
    const double* W1 = params.data();
    const double* b1 = params.data() + d * h;
    const double* w2 = b1 + h;
    double b2 = w2[h];
    double z = b2;
    for (size_t u = 0; u < h; ++u) {
      double a = b1[u];
      const double* wrow = W1 + u * d;
      for (size_t c = 0; c < d; ++c) a += wrow[c] * row[c];
      z += w2[u] * std::tanh(a);
    }
    return z;
  }

  double predict_row(const double* row) const { return sigmoid(raw_score(row)); }
};

// Mean log-loss plus (l2/2)*||weights||^2 (bias terms unpenalized), with the
// analytic gradient. Kept as a pure function of the packed parameter vector
// so it can be checked against finite differences.
inline double classifier_loss_grad(const ClassifierModel& arch,
                                   const std::vector<double>& params,
                                   const FeatureMatrix& X, const std::vector<int>& y,
                                   double l2, std::vector<double>* grad_out) {
  const size_t n = X.rows, d = X.cols;
  const size_t h = static_cast<size_t>(arch.hidden);
  std::vector<double> grad(params.size(), 0.0);
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);

  if (arch.hidden == 0) {
    for (size_t r = 0; r < n; ++r) {
      const double* row = X.row(r);
      double z = params[d];
      for (size_t c = 0; c < d; ++c) z += params[c] * row[c];
      loss += (log1pexp(z) - (y[r] ? z : 0.0)) * inv_n;
      double delta = (sigmoid(z) - (y[r] ? 1.0 : 0.0)) * inv_n;
      for (size_t c = 0; c < d; ++c) grad[c] += delta * row[c];
      grad[d] += delta;
    }
    for (size_t c = 0; c < d; ++c) {
      loss += 0.5 * l2 * params[c] * params[c];
      grad[c] += l2 * params[c];
    }
  } else {
    const double* W1 = params.data();
    const double* b1 = params.data() + d * h;
    const double* w2 = b1 + h;
    const double b2 = w2[h];
    std::vector<double> act(h);
    for (size_t r = 0; r < n; ++r) {
      const double* row = X.row(r);
      double z = b2;
      for (size_t u = 0; u < h; ++u) {
        double a = b1[u];
        const double* wrow = W1 + u * d;
        for (size_t c = 0; c < d; ++c) a += wrow[c] * row[c];
        act[u] = std::tanh(a);
        z += w2[u] * act[u];
      }
      loss += (log1pexp(z) - (y[r] ? z : 0.0)) * inv_n;
      double delta = (sigmoid(z) - (y[r] ? 1.0 : 0.0)) * inv_n;
      for (size_t u = 0; u < h; ++u) {
        grad[d * h + h + u] += delta * act[u];               // w2
        double du = delta * w2[u] * (1.0 - act[u] * act[u]);  // through tanh
        grad[d * h + u] += du;                                // b1
        double* gw = grad.data() + u * d;
        for (size_t c = 0; c < d; ++c) gw[c] += du * row[c];  // W1
      }
      grad[d * h + h + h] += delta;  // b2
    }
    // penalize weights, not biases
    for (size_t i = 0; i < d * h; ++i) {
      loss += 0.5 * l2 * params[i] * params[i];
      grad[i] += l2 * params[i];
    }
    for (size_t u = 0; u < h; ++u) {
      double w = params[d * h + h + u];
      loss += 0.5 * l2 * w * w;
      grad[d * h + h + u] += l2 * w;
    }
  }
  if (grad_out) *grad_out = std::move(grad);
  return loss;
}

// Full-batch Adam to a relative-loss-change tolerance. Logistic starts from
// zeros; the MLP init is Gaussian from the seed, so fits are reproducible.
inline ClassifierModel fit_classifier(const FeatureMatrix& X, const std::vector<int>& y,
                                      const Hyperparams& hp, uint64_t seed) {
  require(X.rows > 0, "fit_classifier: empty input");
  require(X.rows == y.size(), "fit_classifier: row/target length mismatch");
  bool pos = false, neg = false;
  for (int v : y) (v ? pos : neg) = true;
  require(pos && neg, "fit_classifier: targets are single-class");

  ClassifierModel model;
  model.n_features = X.cols;
  model.hidden = hp.hidden;
  model.params.assign(model.param_count(), 0.0);
  if (hp.hidden > 0) {
    Rng rng(derive_seed(seed, "classifier-init"));
    double scale = 1.0 / std::sqrt(static_cast<double>(X.cols));
    for (size_t i = 0; i < static_cast<size_t>(hp.hidden) * X.cols; ++i)
      model.params[i] = rng.normal() * scale;
    size_t w2_off = static_cast<size_t>(hp.hidden) * X.cols + hp.hidden;
    for (size_t u = 0; u < static_cast<size_t>(hp.hidden); ++u)
      model.params[w2_off + u] = rng.normal() * 0.1;
  }

  std::vector<double> grad, m(model.params.size(), 0.0), v(model.params.size(), 0.0);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double prev_loss = 0.0;
  for (int it = 1; it <= hp.max_iter; ++it) {
    double loss = classifier_loss_grad(model, model.params, X, y, hp.l2, &grad);
    double b1t = 1.0 - std::pow(beta1, it);
    double b2t = 1.0 - std::pow(beta2, it);
    for (size_t i = 0; i < model.params.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      model.params[i] -= hp.learning_rate * (m[i] / b1t) / (std::sqrt(v[i] / b2t) + eps);
    }
    if (it > 1 && std::abs(prev_loss - loss) <= hp.tol * std::max(1.0, std::abs(prev_loss)))
      break;
    prev_loss = loss;
  }
  return model;
}

inline std::vector<double> predict(const ClassifierModel& m, const FeatureMatrix& X) {
  require(m.n_features == X.cols, "classifier predict: column count mismatch");
  std::vector<double> out(X.rows);
  for (size_t r = 0; r < X.rows; ++r) out[r] = m.predict_row(X.row(r));
  return out;
}

}  // namespace fairmatch
