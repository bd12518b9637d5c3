#pragma once

#include "carnot/grid.hpp"

#include <Eigen/Core>

#include <string>

namespace carnot {

// Symmetric matrix with provenance. Symmetry holds exactly by construction.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(int size, std::string provenance = {});

  int size() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  // Sets both (i, j) and (j, i).
  void set(int i, int j, double value);
  const Eigen::MatrixXd& matrix() const { return m_; }
  const std::string& provenance() const { return provenance_; }

  // Ascending.
  Eigen::VectorXd eigenvalues() const;
  // Unit eigenvector of the smallest eigenvalue.
  Eigen::VectorXd min_eigenvector() const;
  double spectral_norm() const;

 private:
  Eigen::MatrixXd m_;
  std::string provenance_;
};

double min_eigenvalue(const SymmetricMatrix& m);

/// X_i f(p) by a central difference along the flow t -> p * exp(t X_i).
double horizontal_derivative(const Evaluable& f, const GroupPoint& p, int i, double h);

/// Symmetrized horizontal Hessian ((X_i X_j + X_j X_i) / 2) f(p).
///
/// Diagonal entries are second central differences along one flow. Mixed
/// entries cross-difference f(p * exp(s X_i) * exp(t X_j)) for s, t = +-h,
/// which approximates X_i X_j f(p), and average the (i, j) and (j, i) stencils.
/// Throws DomainError if any stencil point leaves the domain of f.
SymmetricMatrix horizontal_hessian(const Evaluable& f, const GroupPoint& p, double h);

/// Full Hessian in exponential coordinates by central differences.
SymmetricMatrix euclidean_hessian(const Evaluable& f, const GroupPoint& p, double h);

// Checks whether every stencil point of horizontal_hessian lies in f's domain.
bool horizontal_stencil_inside(const Evaluable& f, const GroupPoint& p, double h);
bool euclidean_stencil_inside(const Evaluable& f, const GroupPoint& p, double h);

}  // namespace carnot
