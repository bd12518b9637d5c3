#pragma once

// Symbolic polynomial oracle for left-invariant derivatives.
//
// X_i f(p) = d/ds f(p * exp(s e_i)) at s = 0. With BCH truncated at step 3,
// log(exp(p) exp(s e)) = p + s e + (s/2)[p, e] + (s/12)[p, [p, e]] + O(s^2),
// so X_i = sum_k a_ik(p) d_k with a_i = e_i + [p, e_i]/2 + [p, [p, e_i]]/12.
// The structure constants here are written out by hand per group and never
// read from the library's tables.

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using Monomial = std::vector<int>;

class Poly {
 public:
  explicit Poly(int n = 0) : n_(n) {}

  static Poly constant(int n, double c) {
    Poly p(n);
    if (c != 0.0) p.terms_[Monomial(static_cast<std::size_t>(n), 0)] = c;
    return p;
  }
  static Poly var(int n, int k) {
    Poly p(n);
    Monomial m(static_cast<std::size_t>(n), 0);
    m[static_cast<std::size_t>(k)] = 1;
    p.terms_[m] = 1.0;
    return p;
  }

  int nvars() const { return n_; }

  Poly operator+(const Poly& o) const {
    Poly r = *this;
    for (const auto& [m, c] : o.terms_) r.add_term(m, c);
    return r;
  }
  Poly operator-(const Poly& o) const { return *this + o * -1.0; }
  Poly operator*(double s) const {
    Poly r(n_);
    for (const auto& [m, c] : terms_) r.add_term(m, c * s);
    return r;
  }
  Poly operator*(const Poly& o) const {
    Poly r(n_);
    for (const auto& [ma, ca] : terms_) {
      for (const auto& [mb, cb] : o.terms_) {
        Monomial m(ma.size());
        for (std::size_t k = 0; k < m.size(); ++k) m[k] = ma[k] + mb[k];
        r.add_term(m, ca * cb);
      }
    }
    return r;
  }

  Poly derivative(int k) const {
    Poly r(n_);
    const auto kk = static_cast<std::size_t>(k);
    for (const auto& [m, c] : terms_) {
      if (m[kk] == 0) continue;
      Monomial d = m;
      d[kk] -= 1;
      r.add_term(d, c * m[kk]);
    }
    return r;
  }

  double operator()(const std::vector<double>& x) const {
    double s = 0.0;
    for (const auto& [m, c] : terms_) {
      double t = c;
      for (std::size_t k = 0; k < m.size(); ++k) t *= std::pow(x[k], m[k]);
      s += t;
    }
    return s;
  }

 private:
  void add_term(const Monomial& m, double c) {
    double& slot = terms_[m];
    slot += c;
    if (slot == 0.0) terms_.erase(m);
  }

  int n_;
  std::map<Monomial, double> terms_;
};

inline Poly operator*(double s, const Poly& p) { return p * s; }

struct Bracket {
  int i, j, k;
  double c;
};

// Hand-written tables for the bundled groups (each [e_i, e_j] = c e_k with i < j).
struct GroupTable {
  std::string name;
  int n;
  int m;
  std::vector<Bracket> brackets;
};

inline GroupTable heisenberg_table() { return {"heisenberg", 3, 2, {{0, 1, 2, 1.0}}}; }
inline GroupTable free2_table() {
  return {"free2", 6, 3, {{0, 1, 3, 1.0}, {0, 2, 4, 1.0}, {1, 2, 5, 1.0}}};
}
inline GroupTable engel_table() { return {"engel", 4, 2, {{0, 1, 2, 1.0}, {0, 2, 3, 1.0}}}; }

using PolyVec = std::vector<Poly>;

inline PolyVec bracket(const GroupTable& g, const PolyVec& a, const PolyVec& b) {
  PolyVec out(static_cast<std::size_t>(g.n), Poly(g.n));
  for (const Bracket& e : g.brackets) {
    const auto i = static_cast<std::size_t>(e.i);
    const auto j = static_cast<std::size_t>(e.j);
    out[static_cast<std::size_t>(e.k)] =
        out[static_cast<std::size_t>(e.k)] + (a[i] * b[j] - a[j] * b[i]) * e.c;
  }
  return out;
}

// Coefficients a_ik(p) of the left-invariant field X_i.
inline PolyVec left_invariant_field(const GroupTable& g, int i) {
  PolyVec p;
  PolyVec e;
  for (int k = 0; k < g.n; ++k) {
    p.push_back(Poly::var(g.n, k));
    e.push_back(Poly::constant(g.n, k == i ? 1.0 : 0.0));
  }
  const PolyVec b1 = bracket(g, p, e);
  const PolyVec b2 = bracket(g, p, b1);
  PolyVec a;
  for (std::size_t k = 0; k < p.size(); ++k) a.push_back(e[k] + b1[k] * 0.5 + b2[k] * (1.0 / 12.0));
  return a;
}

inline Poly apply_field(const PolyVec& field, const Poly& f) {
  Poly r(f.nvars());
  for (std::size_t k = 0; k < field.size(); ++k) r = r + field[k] * f.derivative(static_cast<int>(k));
  return r;
}

// Symmetrized horizontal Hessian (X_i X_j + X_j X_i) f / 2, entry-wise.
inline std::vector<std::vector<Poly>> horizontal_hessian(const GroupTable& g, const Poly& f) {
  std::vector<PolyVec> X;
  for (int i = 0; i < g.m; ++i) X.push_back(left_invariant_field(g, i));
  std::vector<std::vector<Poly>> H(static_cast<std::size_t>(g.m),
                                   std::vector<Poly>(static_cast<std::size_t>(g.m), Poly(g.n)));
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (std::size_t j = 0; j < X.size(); ++j) {
      H[i][j] = (apply_field(X[i], apply_field(X[j], f)) + apply_field(X[j], apply_field(X[i], f))) * 0.5;
    }
  }
  return H;
}

// Polynomial test functions built from the coordinates: at least 8 per group,
// mixing horizontal and vertical variables and degrees 1 to 4.
inline std::vector<std::pair<std::string, Poly>> test_polynomials(const GroupTable& g) {
  const int n = g.n;
  auto v = [n](int k) { return Poly::var(n, k); };
  const Poly x = v(0);
  const Poly y = v(1);
  const Poly t = v(g.m);
  const Poly last = v(n - 1);
  std::vector<std::pair<std::string, Poly>> fs = {
      {"x^2", x * x},
      {"x*y", x * y},
      {"t", t},
      {"t^2", t * t},
      {"x*t", x * t},
      {"x^3 - y", x * x * x - y},
      {"y^2*t", y * y * t},
      {"(x+t)^2", (x + t) * (x + t)},
      {"last^2 + x*last", last * last + x * last},
      {"x^2*y^2", x * x * y * y},
      {"x^4", x * x * x * x},
      {"x^3*y", x * x * x * y},
  };
  return fs;
}

}  // namespace oracle
