#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "arcscan/features.hpp"
#include "arcscan/image.hpp"

namespace arcscan {

// Fisher linear discriminant analysis with the equal-covariance Gaussian
// decision rule. Between/within scatter as usual:
//   S_B = sum_c N_c (mu_c - mu)(mu_c - mu)^T
//   S_W = sum_c sum_{f in C_c} (f - mu_c)(f - mu_c)^T
// The projection solves S_W^{-1} S_B W = W Lambda through a Cholesky
// transform of the ridge-regularized S_W, and per-feature importance is
// phi_j = sum_c |W_jc|.
struct LdaModel {
  std::vector<DeficiencyClass> classes;  // distinct labels, ascending
  Eigen::MatrixXd class_means;           // k x d
  Eigen::VectorXd global_mean;           // d
  Eigen::VectorXd class_priors;          // k, sums to 1
  Eigen::MatrixXd projection;            // d x (k-1), unit columns
  Eigen::VectorXd eigenvalues;           // k-1, descending
  int rank = 0;                          // eigenvalues above tolerance
  Eigen::MatrixXd pooled_cov_inverse;    // d x d, regularized
  Eigen::VectorXd feature_importance;    // d

  // cached discriminant: score_c(f) = linear.row(c) . f + constant(c)
  Eigen::MatrixXd discriminant_linear;   // k x d
  Eigen::VectorXd discriminant_const;    // k

  int dims() const { return static_cast<int>(global_mean.size()); }
  int class_count() const { return static_cast<int>(classes.size()); }
};

namespace detail {

struct ClassStats {
  std::vector<DeficiencyClass> classes;
  std::vector<int> counts;
  Eigen::MatrixXd means;      // k x d
  Eigen::VectorXd global;     // d
};

inline ClassStats class_stats(const FeatureMatrix& m) {
  if (m.rows() == 0) throw std::invalid_argument("lda: empty matrix");
  ClassStats s;
  std::vector<int> row_class(m.rows());
  for (int c = 0; c < kClassCount; ++c) {
    int n = 0;
    for (int i = 0; i < m.rows(); ++i)
      if (class_index(m.labels[i]) == c) ++n;
    if (n > 0) {
      s.classes.push_back(class_from_index(c));
      s.counts.push_back(n);
    }
  }
  const int k = static_cast<int>(s.classes.size());
  const int d = m.cols();
  s.means = Eigen::MatrixXd::Zero(k, d);
  s.global = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < m.rows(); ++i) {
    const auto it = std::find(s.classes.begin(), s.classes.end(), m.labels[i]);
    const int c = static_cast<int>(it - s.classes.begin());
    s.means.row(c) += m.values.row(i);
    s.global += m.values.row(i).transpose();
  }
  for (int c = 0; c < k; ++c) s.means.row(c) /= s.counts[c];
  s.global /= m.rows();
  return s;
}

}  // namespace detail

inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> scatter_matrices(
    const FeatureMatrix& m) {
  const detail::ClassStats s = detail::class_stats(m);
  const int k = static_cast<int>(s.classes.size());
  const int d = m.cols();

  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(d, d);
  for (int c = 0; c < k; ++c) {
    const Eigen::VectorXd diff = s.means.row(c).transpose() - s.global;
    sb += s.counts[c] * (diff * diff.transpose());
  }
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < m.rows(); ++i) {
    const auto it = std::find(s.classes.begin(), s.classes.end(), m.labels[i]);
    const int c = static_cast<int>(it - s.classes.begin());
    const Eigen::VectorXd diff = m.values.row(i).transpose() - s.means.row(c).transpose();
    sw += diff * diff.transpose();
  }
  return {sb, sw};
}

inline LdaModel fit(const FeatureMatrix& m, double ridge = 1e-6) {
  if (ridge < 0) throw std::invalid_argument("lda: ridge must be >= 0");
  const detail::ClassStats s = detail::class_stats(m);
  const int k = static_cast<int>(s.classes.size());
  const int d = m.cols();
  const int n = m.rows();

  auto [sb, sw] = scatter_matrices(m);

  // Relative ridge; falls back to an absolute one when S_W vanishes so a
  // degenerate training set still yields a usable (trivial) model.
  const double trace_scale = sw.trace() / d;
  const double reg = ridge * (trace_scale > 0.0 ? trace_scale : 1.0);
  Eigen::MatrixXd sw_reg = sw + reg * Eigen::MatrixXd::Identity(d, d);

  Eigen::LLT<Eigen::MatrixXd> llt(sw_reg);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "lda: regularized within-class scatter is singular to working "
        "precision; increase ridge");

  LdaModel model;
  model.classes = s.classes;
  model.class_means = s.means;
  model.global_mean = s.global;
  model.class_priors = Eigen::VectorXd(k);
  for (int c = 0; c < k; ++c)
    model.class_priors(c) = static_cast<double>(s.counts[c]) / n;

  const int n_dirs = std::min(d, k - 1);
  if (n_dirs > 0) {
    // L^{-1} S_B L^{-T} is symmetric PSD; its eigenvectors back-transform
    // to the generalized problem's solutions.
    const Eigen::MatrixXd l = llt.matrixL();
    const Eigen::MatrixXd t = l.triangularView<Eigen::Lower>().solve(sb);
    const Eigen::MatrixXd msym =
        l.triangularView<Eigen::Lower>().solve(t.transpose()).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (msym + msym.transpose()));
    if (eig.info() != Eigen::Success)
      throw std::runtime_error("lda: eigen decomposition failed");

    model.projection.resize(d, n_dirs);
    model.eigenvalues.resize(n_dirs);
    for (int j = 0; j < n_dirs; ++j) {
      const int src = d - 1 - j;  // solver returns ascending order
      model.eigenvalues(j) = eig.eigenvalues()(src);
      Eigen::VectorXd w = l.transpose().triangularView<Eigen::Upper>().solve(
          eig.eigenvectors().col(src));
      const double norm = w.norm();
      if (norm > 0) w /= norm;
      // deterministic sign: largest-magnitude entry positive
      int arg = 0;
      for (int i = 1; i < d; ++i)
        if (std::abs(w(i)) > std::abs(w(arg))) arg = i;
      if (w(arg) < 0) w = -w;
      model.projection.col(j) = w;
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(model.eigenvalues(0)));
    model.rank = 0;
    for (int j = 0; j < n_dirs; ++j)
      if (model.eigenvalues(j) > tol) ++model.rank;
  } else {
    model.projection.resize(d, 0);
    model.eigenvalues.resize(0);
    model.rank = 0;
  }

  model.feature_importance = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < model.projection.cols(); ++j)
    model.feature_importance += model.projection.col(j).cwiseAbs();

  // Equal-covariance Gaussian discriminant on the pooled covariance.
  const Eigen::MatrixXd pooled = sw_reg / std::max(1, n - k);
  model.pooled_cov_inverse =
      Eigen::LLT<Eigen::MatrixXd>(pooled).solve(Eigen::MatrixXd::Identity(d, d));
  model.discriminant_linear.resize(k, d);
  model.discriminant_const.resize(k);
  for (int c = 0; c < k; ++c) {
    const Eigen::VectorXd a = model.pooled_cov_inverse * s.means.row(c).transpose();
    model.discriminant_linear.row(c) = a.transpose();
    model.discriminant_const(c) = -0.5 * s.means.row(c).dot(a) +
                                  std::log(model.class_priors(c));
  }
  return model;
}

inline DeficiencyClass predict(const LdaModel& model,
                               const Eigen::Ref<const Eigen::VectorXd>& f) {
  if (f.size() != model.dims())
    throw std::invalid_argument("predict: feature dimension mismatch");
  int best = 0;
  double best_score = model.discriminant_linear.row(0).dot(f) +
                      model.discriminant_const(0);
  for (int c = 1; c < model.class_count(); ++c) {
    const double score = model.discriminant_linear.row(c).dot(f) +
                         model.discriminant_const(c);
    if (score > best_score) {  // ties keep the lower class index
      best_score = score;
      best = c;
    }
  }
  return model.classes[best];
}

inline DeficiencyClass predict(const LdaModel& model, std::span<const double> f) {
  return predict(model, Eigen::Map<const Eigen::VectorXd>(
                            f.data(), static_cast<Eigen::Index>(f.size())));
}

inline double accuracy(const LdaModel& model, const FeatureMatrix& test) {
  if (test.rows() == 0) throw std::invalid_argument("accuracy: empty test set");
  int hits = 0;
  for (int i = 0; i < test.rows(); ++i)
    if (predict(model, test.values.row(i).transpose()) == test.labels[i]) ++hits;
  return static_cast<double>(hits) / test.rows();
}

inline Eigen::VectorXd importance(const LdaModel& model) {
  return model.feature_importance;
}

}  // namespace arcscan
