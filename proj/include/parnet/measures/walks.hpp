#pragma once

// Spectral and random-walk measures: eigenvector centrality and the
// accessibility family.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <vector>

#include "parnet/error.hpp"
#include "parnet/graph.hpp"

namespace parnet {

struct EigenvectorResult {
  std::vector<double> values;  // unit L2 norm, non-negative
  bool converged = false;
  std::size_t iterations = 0;
  double eigenvalue = 0.0;     // Rayleigh quotient v'Av
};

/// Power iteration on A + I. The shift keeps the eigenvectors of A and makes
/// the dominant eigenvalue strictly largest in modulus on bipartite graphs.
inline EigenvectorResult eigenvector_centrality(const Network& net, double tol = 1e-10,
                                                std::size_t max_iter = 10000) {
  const std::size_t n = net.node_count();
  EigenvectorResult r;
  r.values.assign(n, 0.0);
  if (net.edge_count() == 0) {
    diag::warn("eigenvector centrality: network has no edges, returning zeros");
    r.converged = true;
    return r;
  }
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), y(n);
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    double norm = 0;
    for (NodeId i = 0; i < n; ++i) {
      double s = x[i];
      for (NodeId j : net.neighbors(i)) s += x[j];
      y[i] = s;
      norm += s * s;
    }
    norm = std::sqrt(norm);
    double diff = 0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] /= norm;
      diff = std::max(diff, std::abs(y[i] - x[i]));
    }
    x.swap(y);
    if (diff < tol) {
      r.converged = true;
      break;
    }
  }
  if (!r.converged) {
    r.iterations = max_iter;
    diag::warn("eigenvector centrality: no convergence after " + std::to_string(max_iter) + " iterations");
  }
  double lambda = 0;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j : net.neighbors(i)) lambda += x[i] * x[j];
  r.eigenvalue = lambda;
  r.values = std::move(x);
  return r;
}

/// Uniform random-walk transition matrix; rows of isolated nodes are zero.
inline Eigen::MatrixXd transition_matrix(const Network& net) {
  const auto n = static_cast<Eigen::Index>(net.node_count());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (NodeId i = 0; i < n; ++i) {
    const auto k = static_cast<double>(net.degree(i));
    for (NodeId j : net.neighbors(i)) t(i, j) = 1.0 / k;
  }
  return t;
}

/// exp of the Shannon entropy (natural log) of a probability row.
inline double exp_entropy(const Eigen::Ref<const Eigen::RowVectorXd>& p) {
  double h = 0;
  for (Eigen::Index j = 0; j < p.size(); ++j)
    if (p(j) > 0) h -= p(j) * std::log(p(j));
  return std::exp(h);
}

/// Row i of T^h scored by exp(entropy); isolated nodes score 0.
inline std::vector<double> accessibility(const Network& net, int h) {
  if (h < 1) throw Error("accessibility needs h >= 1");
  const Eigen::MatrixXd t = transition_matrix(net);
  Eigen::MatrixXd p = t;
  for (int s = 1; s < h; ++s) p = p * t;
  std::vector<double> a(net.node_count(), 0.0);
  for (NodeId i = 0; i < a.size(); ++i)
    if (net.degree(i) > 0) a[i] = exp_entropy(p.row(i));
  return a;
}

/// Walk kernel e^T / e (walks of length l weighted by 1/l!).
inline Eigen::MatrixXd accessibility_kernel(const Network& net) {
  const Eigen::MatrixXd t = transition_matrix(net);
  return Eigen::MatrixXd(t.exp()) / std::exp(1.0);
}

inline std::vector<double> generalized_accessibility(const Network& net) {
  const Eigen::MatrixXd p = accessibility_kernel(net);
  std::vector<double> a(net.node_count(), 0.0);
  for (NodeId i = 0; i < a.size(); ++i)
    if (net.degree(i) > 0) a[i] = exp_entropy(p.row(i));
  return a;
}

}  // namespace parnet
