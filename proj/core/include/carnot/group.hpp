#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace carnot {

// Upper bound on the topological dimension n. Coordinates live inline.
inline constexpr int kMaxDim = 16;

using Coords = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

// Element of the Lie algebra in the graded basis {X_{j,l}}.
struct AlgebraElement {
  Coords coords;

  static AlgebraElement zero(int n) { return {Coords::Zero(n)}; }
  int size() const { return static_cast<int>(coords.size()); }
  double operator[](int i) const { return coords[i]; }
  double& operator[](int i) { return coords[i]; }
};

// Point p = exp(xi_1(p) + ... + xi_r(p)) stored by its exponential coordinates.
struct GroupPoint {
  Coords coords;

  static GroupPoint identity(int n) { return {Coords::Zero(n)}; }
  int size() const { return static_cast<int>(coords.size()); }
  double operator[](int i) const { return coords[i]; }
  double& operator[](int i) { return coords[i]; }
};

// In exponential coordinates exp and log are the identity map on coordinates.
inline GroupPoint exp(const AlgebraElement& a) { return {a.coords}; }
inline AlgebraElement log(const GroupPoint& p) { return {p.coords}; }

GroupPoint make_point(std::initializer_list<double> coords);
AlgebraElement make_element(std::initializer_list<double> coords);

// One entry [e_i, e_j] += c e_k of the structure-constant table (0-based).
struct BracketEntry {
  int i = 0;
  int j = 0;
  int k = 0;
  double c = 0.0;
};

struct CarnotGroupSpec {
  std::string name;
  int step = 1;
  std::vector<int> layer_dims;
  std::vector<BracketEntry> brackets;
};

/// A validated stratified nilpotent Lie group in exponential coordinates.
///
/// Construction checks antisymmetry, grading, stratification and the Jacobi
/// identity of the structure constants and throws SpecError naming the
/// offending entry. The group law uses the Baker-Campbell-Hausdorff series
/// truncated after third-order brackets, which is exact for step <= 3.
class CarnotGroup {
 public:
  explicit CarnotGroup(CarnotGroupSpec spec);

  const CarnotGroupSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  int step() const { return spec_.step; }
  int dim() const { return dim_; }
  int horizontal_dim() const { return spec_.layer_dims.front(); }
  int homogeneous_dim() const { return homogeneous_dim_; }
  // Layer index (1-based) of coordinate `coord`.
  int weight(int coord) const { return weights_[static_cast<std::size_t>(coord)]; }
  std::span<const int> weights() const { return weights_; }
  // 2 * r!
  int gauge_exponent() const { return gauge_exponent_; }
  double structure_constant(int i, int j, int k) const;

  AlgebraElement basis(int k) const;
  // v in V_1 from its m horizontal components.
  AlgebraElement horizontal(std::span<const double> v) const;

  AlgebraElement bracket(const AlgebraElement& a, const AlgebraElement& b) const;
  GroupPoint multiply(const GroupPoint& p, const GroupPoint& q) const;
  GroupPoint inverse(const GroupPoint& p) const;
  GroupPoint dilate(double lambda, const GroupPoint& p) const;
  // p * exp(v): the left-invariant flow of v started at p, at time 1.
  GroupPoint flow(const GroupPoint& p, const AlgebraElement& v) const {
    return multiply(p, exp(v));
  }

  // |xi_i(p)| for layer i (1-based).
  double layer_norm(const GroupPoint& p, int layer) const;
  double gauge_norm(const GroupPoint& p) const;
  // N(p)^{2 r!} = sum_i (|xi_i|^2)^{r!/i}; a polynomial, no roots taken.
  double gauge_power(const GroupPoint& p) const;
  double gauge_power(const Coords& p) const;
  // Term of layer i (1-based) in gauge_power; summing the terms in layer
  // order reproduces gauge_power bit for bit.
  double gauge_power_term(const Coords& p, int layer) const;
  double distance(const GroupPoint& p, const GroupPoint& q) const;
  double euclidean_norm(const GroupPoint& p) const;

 private:
  struct Term {
    int i;
    int j;
    int k;
    double c;
  };

  void check_dim(const Coords& v, const char* what) const;
  void bracket_into(const Coords& a, const Coords& b, Coords& out) const;

  CarnotGroupSpec spec_;
  int dim_ = 0;
  int homogeneous_dim_ = 0;
  int gauge_exponent_ = 2;
  std::vector<int> weights_;
  std::vector<int> layer_begin_;
  std::vector<int> layer_power_;  // r! / layer, per layer
  std::vector<double> dense_;  // dense_[(i * n + j) * n + k]
  std::vector<Term> terms_;    // i < j, nonzero
};

using GroupPtr = std::shared_ptr<const CarnotGroup>;

// Bundled presets.
GroupPtr heisenberg(int n = 1);
GroupPtr free_step2(int generators = 3);
GroupPtr engel();
GroupPtr abelian(int n);

// "heisenberg", "heisenbergN", "free2", "free2_K", "engel", "abelianN".
GroupPtr group_by_name(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace carnot
