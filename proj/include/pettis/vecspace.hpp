#pragma once

#include <span>
#include <string>
#include <vector>

#include "pettis/errors.hpp"

namespace pettis {

enum class NormTag { L1, L2, LInf };

NormTag norm_tag_from_string(const std::string& s);
std::string to_string(NormTag tag);

// Element of the model space R^d.
struct Vector {
  std::vector<double> coords;

  Vector() = default;
  explicit Vector(std::vector<double> c);

  static Vector zero(int dim);

  int dim() const { return static_cast<int>(coords.size()); }
  double operator[](int i) const { return coords[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return coords[static_cast<std::size_t>(i)]; }
  bool finite() const;
};

Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double c, const Vector& v);

// Finite-dimensional stand-in for the ambient normed space. The norm tag
// affects reporting only, never reconstruction.
struct NormedSpace {
  int dim = 0;
  NormTag norm_tag = NormTag::L2;

  NormedSpace(int d, NormTag tag = NormTag::L2);
  double norm(const Vector& v) const;
};

// Continuous linear functional, acting by the Euclidean pairing.
struct Functional {
  std::vector<double> coeffs;

  Functional() = default;
  explicit Functional(std::vector<double> c);
  int dim() const { return static_cast<int>(coeffs.size()); }
};

double apply(const Functional& f, const Vector& v);

inline constexpr double kDefaultReconstructTol = 1e-8;
inline constexpr double kSpanningRankTol = 1e-10;

// A finite probe set standing in for the dual space. When `spanning` is
// requested the m x d coefficient matrix must have full column rank
// (singular values above kSpanningRankTol relative to the largest); the
// pseudo-inverse is factored once at construction so reconstruction is a
// matrix-vector product.
class DualFamily {
 public:
  explicit DualFamily(std::vector<Functional> members, bool spanning = true);

  static DualFamily standard_basis(int dim);
  // f_j = e_0 + e_1 + ... + e_j; spanning lower-triangular family of size dim.
  static DualFamily triangular_ones(int dim);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(members_.size()); }
  bool spanning() const { return spanning_; }
  const std::vector<Functional>& members() const { return members_; }
  const Functional& member(int j) const { return members_[static_cast<std::size_t>(j)]; }

  // Least-squares solution v of apply(f_j, v) = pairings_j with an explicit
  // residual gate: max_j |apply(f_j, v) - pairings_j| <= tol, else the
  // pairings are not realized by any single vector and we throw
  // PettisPropertyError. Requires a spanning family.
  Vector reconstruct(std::span<const double> pairings,
                     double tol = kDefaultReconstructTol) const;

  // max_j |apply(f_j, v) - pairings_j|
  double residual(std::span<const double> pairings, const Vector& v) const;

  // d x m row-major pseudo-inverse, for hot loops that reconstruct per node.
  const std::vector<double>& pseudo_inverse() const { return pinv_; }

 private:
  std::vector<Functional> members_;
  bool spanning_ = false;
  int dim_ = 0;
  std::vector<double> pinv_;
};

}  // namespace pettis
