#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pettis/paths.hpp"
#include "pettis/vecspace.hpp"

namespace pettis {

// Residual gate for the weak-consistency property of every vector-valued
// integral: pairing the result with each family member must match the scalar
// integral of the paired integrand.
inline constexpr double kWeakConsistencyTol = 1e-10;

struct ScalarField {
  std::function<double(double)> eval;

  double operator()(double t) const;
  static ScalarField constant(double c);
  static ScalarField zero() { return constant(0.0); }
};

struct VectorField {
  int dim = 0;
  std::function<Vector(double)> eval;

  Vector operator()(double t) const;
  static VectorField constant(Vector v);
  static VectorField zero(int dim);
};

// Coefficients in ascending powers of t.
struct Polynomial {
  std::vector<double> coeffs;

  Polynomial() = default;
  explicit Polynomial(std::vector<double> c) : coeffs(std::move(c)) {}

  double value(double t) const;
  Polynomial antiderivative() const;
  // Exact closed-form integral over [a, b].
  double integral(double a, double b) const;
  ScalarField field() const;
};

Polynomial operator*(const Polynomial& a, const Polynomial& b);
Polynomial operator+(const Polynomial& a, const Polynomial& b);

// Vector field with one polynomial per coordinate; exactly integrable, the
// form used by configs and by closed-form cross-checks.
struct PolyVectorField {
  std::vector<Polynomial> coords;

  PolyVectorField() = default;
  explicit PolyVectorField(std::vector<Polynomial> c) : coords(std::move(c)) {}

  int dim() const { return static_cast<int>(coords.size()); }
  Vector value(double t) const;
  VectorField field() const;
};

// The vector measure with density Phi against the grid's base measure.
struct VectorMeasureDensity {
  TimeGrid grid;
  VectorField density;
};

// Running left-endpoint sums: out[k] = sum_{i<k} f(t_i) dt, one per node.
std::vector<double> lebesgue_prefix(const ScalarField& f, const TimeGrid& grid);

// Left-endpoint Riemann sum over [0, up_to]; up_to must be a grid node.
double lebesgue_scalar(const ScalarField& f, const TimeGrid& grid, double up_to);

// Direct per-coordinate integration; the algebraic route that bypasses the
// dual family entirely.
Vector coordinatewise_integral(const VectorField& field, const TimeGrid& grid, double up_to);

// Weak integral: per-functional scalar integrals, then reconstruction.
Vector pettis_integral(const VectorField& field, const TimeGrid& grid, const DualFamily& family,
                       double up_to, double tol = kWeakConsistencyTol);

// Closed-form variant for polynomial fields (unit-test use).
Vector pettis_integral_exact(const PolyVectorField& field, const DualFamily& family,
                             double up_to, double tol = kWeakConsistencyTol);

// Integral of the scalar phi against the vector measure N = integral of Phi:
// evaluates the product field phi * Phi as a weak integral.
Vector bds_integral(const ScalarField& phi, const VectorMeasureDensity& measure,
                    const DualFamily& family, double up_to, double tol = kWeakConsistencyTol);

Vector bds_integral_exact(const Polynomial& phi, const PolyVectorField& density,
                          const DualFamily& family, double up_to,
                          double tol = kWeakConsistencyTol);

// Left-point Ito sum I(t_k) = sum_{i<k} f(t_i) (w_{t_{i+1}} - w_{t_i}); I(0) = 0.
ScalarPath ito_integral(const ScalarField& integrand, const ScalarPath& w);

// Adapted path integrand: values on the same grid as w, the value at node i
// multiplying the increment that starts at node i. A path on a different grid
// is rejected.
ScalarPath ito_integral(const ScalarPath& integrand, const ScalarPath& w);

// Adapted functional integrand: at node i it is handed exactly the prefix
// w_{t_0..t_i}, so lookahead is impossible by construction.
ScalarPath ito_integral_adapted(const std::function<double(std::span<const double>)>& integrand,
                                const ScalarPath& w);

// Stochastic weak integral: per-functional Ito sums of the paired integrand,
// reconstructed into a vector at every node.
VecPath stochastic_pettis_integral(const VectorField& field, const ScalarPath& w,
                                   const DualFamily& family, double tol = kWeakConsistencyTol);

// Deterministic weak integral at every node (the drift term's path).
VecPath pettis_prefix_path(const VectorField& field, const TimeGrid& grid,
                           const DualFamily& family, double tol = kWeakConsistencyTol);

// A(t) = (weak) int_0^t Psi ds + (weak) int_0^t Phi dw, nodewise; A(0) = 0.
VecPath ito_pettis_path(const VectorField& psi, const VectorField& phi, const ScalarPath& w,
                        const DualFamily& family, double tol = kWeakConsistencyTol);

}  // namespace pettis
