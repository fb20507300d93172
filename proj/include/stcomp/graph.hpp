#pragma once

// Undirected weighted communication graphs, their Laplacians and the spectral
// quantities (lambda_2, lambda_n, S) used by step-size bounds and the
// disagreement-commutation estimator. S is the n x (n-1) orthonormal
// complement of the all-ones vector, canonicalized so repeated runs see the
// same basis.

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "stcomp/errors.hpp"
#include "stcomp/rng.hpp"

namespace stcomp {

struct Graph {
  int n = 0;
  Eigen::MatrixXd weights;  // symmetric, zero diagonal, nonnegative

  std::vector<int> neighbors(int i) const {
    std::vector<int> out;
    for (int j = 0; j < n; ++j)
      if (j != i && weights(i, j) > 0.0) out.push_back(j);
    return out;
  }
};

inline void validate_graph(const Graph& g) {
  if (g.n < 2) throw TopologyError("graph: need at least 2 nodes");
  if (g.weights.rows() != g.n || g.weights.cols() != g.n)
    throw TopologyError("graph: weight matrix shape mismatch");
  for (int i = 0; i < g.n; ++i) {
    if (g.weights(i, i) != 0.0)
      throw TopologyError("graph: nonzero diagonal entry at " + std::to_string(i));
    for (int j = 0; j < g.n; ++j) {
      if (!(g.weights(i, j) >= 0.0))
        throw TopologyError("graph: negative or NaN weight");
      if (g.weights(i, j) != g.weights(j, i))
        throw TopologyError("graph: weight matrix not symmetric");
    }
  }
}

/// Cycle graph on n >= 3 nodes, every edge with the same weight. A 2-ring is
/// rejected: it degenerates to a doubled edge.
inline Graph build_ring(int n, double weight) {
  if (n < 3) throw TopologyError("build_ring: n must be >= 3, got " + std::to_string(n));
  if (!(weight > 0.0)) throw TopologyError("build_ring: weight must be positive");
  Graph g;
  g.n = n;
  g.weights = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    int j = (i + 1) % n;
    g.weights(i, j) = weight;
    g.weights(j, i) = weight;
  }
  return g;
}

inline Graph build_complete(int n, double weight) {
  if (n < 2) throw TopologyError("build_complete: n must be >= 2");
  if (!(weight > 0.0)) throw TopologyError("build_complete: weight must be positive");
  Graph g;
  g.n = n;
  g.weights = Eigen::MatrixXd::Constant(n, n, weight);
  g.weights.diagonal().setZero();
  return g;
}

/// L_ij = -a_ij off-diagonal, L_ii = sum_j a_ij. Row sums are zero by
/// construction.
inline Eigen::MatrixXd laplacian(const Graph& g) {
  validate_graph(g);
  Eigen::MatrixXd lap = -g.weights;
  for (int i = 0; i < g.n; ++i) lap(i, i) = g.weights.row(i).sum();
  return lap;
}

inline bool is_connected(const Graph& g) {
  validate_graph(g);
  std::vector<char> seen(g.n, 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  int count = 1;
  while (!queue.empty()) {
    int i = queue.front();
    queue.pop_front();
    for (int j = 0; j < g.n; ++j) {
      if (!seen[j] && g.weights(i, j) > 0.0) {
        seen[j] = 1;
        ++count;
        queue.push_back(j);
      }
    }
  }
  return count == g.n;
}

struct Spectrum {
  Eigen::VectorXd eigenvalues;  // ascending, eigenvalues(0) == 0
  Eigen::MatrixXd s_basis;      // n x (n-1); column k pairs with eigenvalues(k+1)

  double lambda2() const { return eigenvalues(1); }
  double lambda_max() const { return eigenvalues(eigenvalues.size() - 1); }
};

/// Eigen-decomposes a Laplacian. The zero eigenspace is re-based so that the
/// all-ones direction is explicit and the remaining columns complete it; this
/// also covers disconnected graphs, where S is just an orthonormal complement
/// of 1. Columns are sign-fixed (first component above 1e-12 made positive).
inline Spectrum spectrum(const Eigen::MatrixXd& lap) {
  const auto n = lap.rows();
  if (n < 2 || lap.cols() != n) throw NumericError("spectrum: bad Laplacian shape");
  if ((lap - lap.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw NumericError("spectrum: Laplacian not symmetric");
  if ((lap.rowwise().sum()).cwiseAbs().maxCoeff() > 1e-8)
    throw NumericError("spectrum: Laplacian row sums not zero");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  if (solver.info() != Eigen::Success)
    throw NumericError("spectrum: eigensolver did not converge");

  Eigen::VectorXd evals = solver.eigenvalues();
  Eigen::MatrixXd evecs = solver.eigenvectors();

  const double tol = 1e-9 * std::max(1.0, std::abs(evals(n - 1)));
  int zero_dim = 0;
  while (zero_dim < n && std::abs(evals(zero_dim)) <= tol) {
    evals(zero_dim) = 0.0;
    ++zero_dim;
  }
  if (zero_dim == 0) throw NumericError("spectrum: no zero eigenvalue found");

  // Rotate the zero eigenspace so its first basis vector is 1/sqrt(n); the
  // other zero-space columns then complete the complement of 1.
  Eigen::VectorXd ones_unit = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  Eigen::MatrixXd zspace = evecs.leftCols(zero_dim);
  Eigen::VectorXd w = zspace.transpose() * ones_unit;  // unit m-vector
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(zero_dim, zero_dim);
  Eigen::VectorXd u = w - Eigen::VectorXd::Unit(zero_dim, 0);
  double un2 = u.squaredNorm();
  if (un2 > 1e-24) rot -= (2.0 / un2) * (u * u.transpose());  // Householder: rot*e1 = +-w
  if ((rot.col(0) - w).norm() > 1e-8) rot = -rot;
  Eigen::MatrixXd zrot = zspace * rot;

  Spectrum sp;
  sp.eigenvalues = evals;
  sp.s_basis.resize(n, n - 1);
  if (zero_dim > 1) sp.s_basis.leftCols(zero_dim - 1) = zrot.rightCols(zero_dim - 1);
  sp.s_basis.rightCols(n - zero_dim) = evecs.rightCols(n - zero_dim);

  for (int k = 0; k < n - 1; ++k) {
    for (int i = 0; i < n; ++i) {
      if (std::abs(sp.s_basis(i, k)) > 1e-12) {
        if (sp.s_basis(i, k) < 0.0) sp.s_basis.col(k) = -sp.s_basis.col(k);
        break;
      }
    }
  }
  return sp;
}

inline Spectrum spectrum(const Graph& g) { return spectrum(laplacian(g)); }

/// Edge-list format: header "n <count>", then one "i j w" line per edge with
/// 0-based endpoints.
inline Graph parse_edge_list(std::istream& in) {
  std::string tag;
  int n = 0;
  if (!(in >> tag >> n) || tag != "n")
    throw ConfigError("edge list: expected header line 'n <count>'");
  if (n < 2) throw TopologyError("edge list: need at least 2 nodes");
  Graph g;
  g.n = n;
  g.weights = Eigen::MatrixXd::Zero(n, n);
  int i = 0, j = 0;
  double w = 0.0;
  while (in >> i >> j >> w) {
    if (i < 0 || i >= n || j < 0 || j >= n)
      throw ConfigError("edge list: node index out of range in edge " +
                        std::to_string(i) + " " + std::to_string(j));
    if (i == j) throw TopologyError("edge list: self-loop at node " + std::to_string(i));
    if (!(w > 0.0)) throw ConfigError("edge list: edge weight must be positive");
    g.weights(i, j) = w;
    g.weights(j, i) = w;
  }
  return g;
}

inline Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file: " + path);
  return parse_edge_list(in);
}

/// Erdos-Renyi style sample with edge probability p and weights in
/// [w_lo, w_hi); disconnected samples are rejected and redrawn.
inline Graph random_connected_graph(int n, double p, double w_lo, double w_hi,
                                    Rng& rng, int max_tries = 1000) {
  if (n < 2) throw TopologyError("random_connected_graph: n must be >= 2");
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    Graph g;
    g.n = n;
    g.weights = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.uniform01() < p) {
          double w = rng.uniform(w_lo, w_hi);
          g.weights(i, j) = w;
          g.weights(j, i) = w;
        }
    if (is_connected(g)) return g;
  }
  throw TopologyError("random_connected_graph: rejection budget exhausted");
}

}  // namespace stcomp
