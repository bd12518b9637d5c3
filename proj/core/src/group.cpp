#include "carnot/group.hpp"

#include "carnot/error.hpp"
#include "carnot/format.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace carnot {

namespace {

std::string describe(std::size_t index, const BracketEntry& e) {
  return "brackets[" + std::to_string(index) + "] (" + std::to_string(e.i) + ", " +
         std::to_string(e.j) + ", " + std::to_string(e.k) + ", " + format_double(e.c) + ")";
}

int factorial(int r) {
  int f = 1;
  for (int i = 2; i <= r; ++i) f *= i;
  return f;
}

double ipow(double base, int exponent) {
  double result = 1.0;
  for (int i = 0; i < exponent; ++i) result *= base;
  return result;
}

}  // namespace

GroupPoint make_point(std::initializer_list<double> coords) {
  GroupPoint p{Coords(static_cast<Eigen::Index>(coords.size()))};
  std::copy(coords.begin(), coords.end(), p.coords.data());
  return p;
}

AlgebraElement make_element(std::initializer_list<double> coords) {
  AlgebraElement a{Coords(static_cast<Eigen::Index>(coords.size()))};
  std::copy(coords.begin(), coords.end(), a.coords.data());
  return a;
}

CarnotGroup::CarnotGroup(CarnotGroupSpec spec) : spec_(std::move(spec)) {
  const int r = spec_.step;
  if (r < 1) throw SpecError("step must be >= 1, got " + std::to_string(r));
  if (static_cast<int>(spec_.layer_dims.size()) != r) {
    throw SpecError("layer_dims has " + std::to_string(spec_.layer_dims.size()) +
                    " entries but step is " + std::to_string(r));
  }
  for (std::size_t l = 0; l < spec_.layer_dims.size(); ++l) {
    if (spec_.layer_dims[l] < 1) {
      throw SpecError("layer_dims[" + std::to_string(l) + "] must be >= 1");
    }
  }
  dim_ = std::accumulate(spec_.layer_dims.begin(), spec_.layer_dims.end(), 0);
  if (dim_ > kMaxDim) {
    throw SpecError("topological dimension " + std::to_string(dim_) + " exceeds limit " +
                    std::to_string(kMaxDim));
  }
  for (int l = 0; l < r; ++l) {
    layer_begin_.push_back(static_cast<int>(weights_.size()));
    for (int d = 0; d < spec_.layer_dims[static_cast<std::size_t>(l)]; ++d) weights_.push_back(l + 1);
    homogeneous_dim_ += (l + 1) * spec_.layer_dims[static_cast<std::size_t>(l)];
  }
  layer_begin_.push_back(dim_);
  gauge_exponent_ = 2 * factorial(r);
  for (int l = 1; l <= r; ++l) layer_power_.push_back(factorial(r) / l);

  const int n = dim_;
  const auto at = [n](int i, int j, int k) {
    return static_cast<std::size_t>((i * n + j) * n + k);
  };
  dense_.assign(static_cast<std::size_t>(n * n * n), 0.0);
  std::vector<char> seen(dense_.size(), 0);

  for (std::size_t idx = 0; idx < spec_.brackets.size(); ++idx) {
    const BracketEntry& e = spec_.brackets[idx];
    if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n || e.k < 0 || e.k >= n) {
      throw SpecError(describe(idx, e) + ": index out of range [0, " + std::to_string(n) + ")");
    }
    if (!std::isfinite(e.c)) throw SpecError(describe(idx, e) + ": non-finite coefficient");
    if (e.c == 0.0) continue;
    if (e.i == e.j) {
      throw SpecError(describe(idx, e) + ": violates antisymmetry ([e_i, e_i] must vanish)");
    }
    const int wsum = weights_[static_cast<std::size_t>(e.i)] + weights_[static_cast<std::size_t>(e.j)];
    if (wsum > r) {
      throw SpecError(describe(idx, e) + ": violates grading (bracket of weight " +
                      std::to_string(wsum) + " exceeds step " + std::to_string(r) + ")");
    }
    if (weights_[static_cast<std::size_t>(e.k)] != wsum) {
      throw SpecError(describe(idx, e) + ": violates grading (lands in layer " +
                      std::to_string(weights_[static_cast<std::size_t>(e.k)]) + ", expected " +
                      std::to_string(wsum) + ")");
    }
    if (seen[at(e.i, e.j, e.k)]) {
      if (dense_[at(e.i, e.j, e.k)] != e.c) {
        throw SpecError(describe(idx, e) + ": violates antisymmetry (conflicts with an earlier entry)");
      }
      continue;
    }
    seen[at(e.i, e.j, e.k)] = seen[at(e.j, e.i, e.k)] = 1;
    dense_[at(e.i, e.j, e.k)] = e.c;
    dense_[at(e.j, e.i, e.k)] = -e.c;
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (dense_[at(i, j, k)] != 0.0) terms_.push_back({i, j, k, dense_[at(i, j, k)]});
      }
    }
  }

  // Jacobi: [e_i,[e_j,e_l]] + [e_j,[e_l,e_i]] + [e_l,[e_i,e_j]] = 0.
  double scale = 1.0;
  for (double c : dense_) scale = std::max(scale, std::abs(c));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int l = j + 1; l < n; ++l) {
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          for (int a = 0; a < n; ++a) {
            s += dense_[at(j, l, a)] * dense_[at(i, a, k)];
            s += dense_[at(l, i, a)] * dense_[at(j, a, k)];
            s += dense_[at(i, j, a)] * dense_[at(l, a, k)];
          }
          if (std::abs(s) > 1e-12 * scale * scale) {
            throw SpecError("Jacobi identity fails on basis triple (" + std::to_string(i) + ", " +
                            std::to_string(j) + ", " + std::to_string(l) + ") in component " +
                            std::to_string(k));
          }
        }
      }
    }
  }

  // Stratification: [V_1, V_j] spans V_{j+1}.
  for (int layer = 1; layer < r; ++layer) {
    const int lo = layer_begin_[static_cast<std::size_t>(layer)];
    const int hi = layer_begin_[static_cast<std::size_t>(layer) + 1];
    std::vector<Eigen::VectorXd> columns;
    for (int a = layer_begin_[0]; a < layer_begin_[1]; ++a) {
      for (int b = layer_begin_[static_cast<std::size_t>(layer) - 1];
           b < layer_begin_[static_cast<std::size_t>(layer)]; ++b) {
        Eigen::VectorXd col(hi - lo);
        for (int k = lo; k < hi; ++k) col[k - lo] = dense_[at(a, b, k)];
        columns.push_back(col);
      }
    }
    Eigen::MatrixXd span(hi - lo, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) span.col(static_cast<Eigen::Index>(c)) = columns[c];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(span);
    lu.setThreshold(1e-12);
    if (lu.rank() != hi - lo) {
      throw SpecError("not stratified: [V_1, V_" + std::to_string(layer) + "] spans dimension " +
                      std::to_string(lu.rank()) + " of V_" + std::to_string(layer + 1) + " (" +
                      std::to_string(hi - lo) + ")");
    }
  }
}

double CarnotGroup::structure_constant(int i, int j, int k) const {
  return dense_[static_cast<std::size_t>((i * dim_ + j) * dim_ + k)];
}

AlgebraElement CarnotGroup::basis(int k) const {
  if (k < 0 || k >= dim_) throw InvalidArgumentError("basis index out of range");
  AlgebraElement e = AlgebraElement::zero(dim_);
  e[k] = 1.0;
  return e;
}

AlgebraElement CarnotGroup::horizontal(std::span<const double> v) const {
  if (static_cast<int>(v.size()) != horizontal_dim()) {
    throw InvalidArgumentError("horizontal vector has " + std::to_string(v.size()) +
                               " components, expected " + std::to_string(horizontal_dim()));
  }
  AlgebraElement e = AlgebraElement::zero(dim_);
  for (std::size_t i = 0; i < v.size(); ++i) e[static_cast<int>(i)] = v[i];
  return e;
}

void CarnotGroup::check_dim(const Coords& v, const char* what) const {
  if (v.size() != dim_) {
    throw InvalidArgumentError(std::string(what) + " has dimension " + std::to_string(v.size()) +
                               " but group '" + spec_.name + "' has dimension " +
                               std::to_string(dim_));
  }
}

void CarnotGroup::bracket_into(const Coords& a, const Coords& b, Coords& out) const {
  out.setZero(dim_);
  for (const Term& t : terms_) out[t.k] += t.c * (a[t.i] * b[t.j] - a[t.j] * b[t.i]);
}

AlgebraElement CarnotGroup::bracket(const AlgebraElement& a, const AlgebraElement& b) const {
  check_dim(a.coords, "bracket operand");
  check_dim(b.coords, "bracket operand");
  AlgebraElement out;
  bracket_into(a.coords, b.coords, out.coords);
  return out;
}

GroupPoint CarnotGroup::multiply(const GroupPoint& p, const GroupPoint& q) const {
  if (spec_.step > 3) {
    throw UnsupportedStepError("group law implemented for step <= 3; group '" + spec_.name +
                               "' has step " + std::to_string(spec_.step));
  }
  check_dim(p.coords, "left factor");
  check_dim(q.coords, "right factor");
  GroupPoint out{p.coords + q.coords};
  if (spec_.step == 1) return out;
  Coords ab;
  bracket_into(p.coords, q.coords, ab);
  out.coords += 0.5 * ab;
  if (spec_.step == 3) {
    // [a,[a,b]] + [b,[b,a]] = [a,[a,b]] - [b,[a,b]] = [a - b, [a,b]]
    Coords third;
    bracket_into(p.coords - q.coords, ab, third);
    out.coords += third / 12.0;
  }
  return out;
}

GroupPoint CarnotGroup::inverse(const GroupPoint& p) const {
  check_dim(p.coords, "point");
  return {-p.coords};
}

GroupPoint CarnotGroup::dilate(double lambda, const GroupPoint& p) const {
  if (!(lambda > 0.0)) {
    throw InvalidArgumentError("dilation factor must be positive, got " + format_double(lambda));
  }
  check_dim(p.coords, "point");
  GroupPoint out = p;
  double scale = 1.0;
  for (int layer = 1; layer <= spec_.step; ++layer) {
    scale *= lambda;
    for (int c = layer_begin_[static_cast<std::size_t>(layer) - 1];
         c < layer_begin_[static_cast<std::size_t>(layer)]; ++c) {
      out[c] *= scale;
    }
  }
  return out;
}

double CarnotGroup::layer_norm(const GroupPoint& p, int layer) const {
  check_dim(p.coords, "point");
  if (layer < 1 || layer > spec_.step) throw InvalidArgumentError("layer out of range");
  double s = 0.0;
  for (int c = layer_begin_[static_cast<std::size_t>(layer) - 1];
       c < layer_begin_[static_cast<std::size_t>(layer)]; ++c) {
    s += p[c] * p[c];
  }
  return std::sqrt(s);
}

double CarnotGroup::gauge_power(const GroupPoint& p) const { return gauge_power(p.coords); }

double CarnotGroup::gauge_power(const Coords& p) const {
  if (p.size() != dim_) [[unlikely]] check_dim(p, "point");
  double total = 0.0;
  for (int l = 1; l <= step(); ++l) total += gauge_power_term(p, l);
  return total;
}

double CarnotGroup::gauge_power_term(const Coords& p, int layer) const {
  const auto l = static_cast<std::size_t>(layer - 1);
  double s = 0.0;
  for (int c = layer_begin_[l]; c < layer_begin_[l + 1]; ++c) s += p[c] * p[c];
  return ipow(s, layer_power_[l]);
}

double CarnotGroup::gauge_norm(const GroupPoint& p) const {
  const double power = gauge_power(p);
  if (power == 0.0) return 0.0;
  return std::pow(power, 1.0 / gauge_exponent_);
}

double CarnotGroup::distance(const GroupPoint& p, const GroupPoint& q) const {
  return gauge_norm(multiply(inverse(p), q));
}

double CarnotGroup::euclidean_norm(const GroupPoint& p) const {
  check_dim(p.coords, "point");
  return p.coords.norm();
}

}  // namespace carnot
