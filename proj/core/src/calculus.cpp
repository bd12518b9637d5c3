#include "carnot/calculus.hpp"

#include "carnot/error.hpp"
#include "carnot/format.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace carnot {

namespace {

std::string describe(const GroupPoint& p) {
  std::string s = "(";
  for (int i = 0; i < p.size(); ++i) {
    if (i) s += ", ";
    s += format_double(p[i]);
  }
  return s + ")";
}

void check_step(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw InvalidArgumentError("finite-difference step must be positive, got " + format_double(h));
  }
}

AlgebraElement scaled_basis(const CarnotGroup& g, int i, double t) {
  AlgebraElement e = AlgebraElement::zero(g.dim());
  e[i] = t;
  return e;
}

// p * exp(s X_i) * exp(t X_j)
GroupPoint composed(const CarnotGroup& g, const GroupPoint& p, int i, double s, int j, double t) {
  return g.flow(g.flow(p, scaled_basis(g, i, s)), scaled_basis(g, j, t));
}

double eval_checked(const Evaluable& f, const GroupPoint& q, const GroupPoint& p, const char* what,
                    double h) {
  if (!f.contains(q)) {
    throw DomainError(std::string(what) + " stencil at p = " + describe(p) + " with h = " +
                      format_double(h) + " leaves the domain at " + describe(q));
  }
  return f(q);
}

}  // namespace

SymmetricMatrix::SymmetricMatrix(int size, std::string provenance)
    : m_(Eigen::MatrixXd::Zero(size, size)), provenance_(std::move(provenance)) {}

void SymmetricMatrix::set(int i, int j, double value) {
  m_(i, j) = value;
  m_(j, i) = value;
}

Eigen::VectorXd SymmetricMatrix::eigenvalues() const {
  if (size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

Eigen::VectorXd SymmetricMatrix::min_eigenvector() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m_);
  return solver.eigenvectors().col(0);
}

double SymmetricMatrix::spectral_norm() const {
  const Eigen::VectorXd ev = eigenvalues();
  if (ev.size() == 0) return 0.0;
  return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
}

double min_eigenvalue(const SymmetricMatrix& m) {
  if (m.size() == 0) throw InvalidArgumentError("min_eigenvalue of an empty matrix");
  return m.eigenvalues()[0];
}

double horizontal_derivative(const Evaluable& f, const GroupPoint& p, int i, double h) {
  check_step(h);
  const CarnotGroup& g = f.group();
  if (i < 0 || i >= g.horizontal_dim()) {
    throw InvalidArgumentError("horizontal index " + std::to_string(i) + " out of range");
  }
  const GroupPoint plus = g.flow(p, scaled_basis(g, i, h));
  const GroupPoint minus = g.flow(p, scaled_basis(g, i, -h));
  for (const GroupPoint* q : {&plus, &minus}) {
    if (!f.contains(*q)) {
      throw DomainError("X_" + std::to_string(i + 1) + " derivative at p = " + describe(p) +
                        " with h = " + format_double(h) + " leaves the domain at " + describe(*q));
    }
  }
  return (f(plus) - f(minus)) / (2.0 * h);
}

bool horizontal_stencil_inside(const Evaluable& f, const GroupPoint& p, double h) {
  if (!f.domain()) return true;
  const CarnotGroup& g = f.group();
  const int m = g.horizontal_dim();
  if (!f.contains(p)) return false;
  for (int i = 0; i < m; ++i) {
    for (double s : {-h, h}) {
      if (!f.contains(g.flow(p, scaled_basis(g, i, s)))) return false;
    }
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      for (double s : {-h, h}) {
        for (double t : {-h, h}) {
          if (!f.contains(composed(g, p, i, s, j, t))) return false;
        }
      }
    }
  }
  return true;
}

SymmetricMatrix horizontal_hessian(const Evaluable& f, const GroupPoint& p, double h) {
  check_step(h);
  const CarnotGroup& g = f.group();
  const int m = g.horizontal_dim();
  SymmetricMatrix H(m, "horizontal_hessian of '" + f.name() + "' at " + describe(p) +
                           " h=" + format_double(h));
  const double center = eval_checked(f, p, p, "horizontal Hessian", h);
  const double inv_h2 = 1.0 / (h * h);
  for (int i = 0; i < m; ++i) {
    const double fp = eval_checked(f, g.flow(p, scaled_basis(g, i, h)), p, "horizontal Hessian", h);
    const double fm = eval_checked(f, g.flow(p, scaled_basis(g, i, -h)), p, "horizontal Hessian", h);
    H.set(i, i, (fp - 2.0 * center + fm) * inv_h2);
  }
  const auto cross = [&](int i, int j) {
    const double pp = eval_checked(f, composed(g, p, i, h, j, h), p, "horizontal Hessian", h);
    const double pm = eval_checked(f, composed(g, p, i, h, j, -h), p, "horizontal Hessian", h);
    const double mp = eval_checked(f, composed(g, p, i, -h, j, h), p, "horizontal Hessian", h);
    const double mm = eval_checked(f, composed(g, p, i, -h, j, -h), p, "horizontal Hessian", h);
    return (pp - pm - mp + mm) * (0.25 * inv_h2);
  };
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) H.set(i, j, 0.5 * (cross(i, j) + cross(j, i)));
  }
  return H;
}

bool euclidean_stencil_inside(const Evaluable& f, const GroupPoint& p, double h) {
  if (!f.domain()) return true;
  const BoxDomain& box = *f.domain();
  for (int a = 0; a < p.size(); ++a) {
    const double slack = 1e-12 * (box.upper()[a] - box.lower()[a]);
    if (p[a] - h < box.lower()[a] - slack || p[a] + h > box.upper()[a] + slack) return false;
  }
  return true;
}

SymmetricMatrix euclidean_hessian(const Evaluable& f, const GroupPoint& p, double h) {
  check_step(h);
  const int n = f.group().dim();
  SymmetricMatrix H(n, "euclidean_hessian of '" + f.name() + "' at " + describe(p) +
                           " h=" + format_double(h));
  const auto shifted = [&](int a, double da, int b, double db) {
    GroupPoint q = p;
    q[a] += da;
    q[b] += db;
    return eval_checked(f, q, p, "Euclidean Hessian", h);
  };
  const double center = eval_checked(f, p, p, "Euclidean Hessian", h);
  const double inv_h2 = 1.0 / (h * h);
  for (int a = 0; a < n; ++a) {
    H.set(a, a, (shifted(a, h, a, 0.0) - 2.0 * center + shifted(a, -h, a, 0.0)) * inv_h2);
    for (int b = a + 1; b < n; ++b) {
      const double v = shifted(a, h, b, h) - shifted(a, h, b, -h) - shifted(a, -h, b, h) +
                       shifted(a, -h, b, -h);
      H.set(a, b, v * 0.25 * inv_h2);
    }
  }
  return H;
}

}  // namespace carnot
