#include "pettis/integrate.hpp"

#include <cmath>
#include <utility>

namespace pettis {

double ScalarField::operator()(double t) const {
  if (!eval) throw UsageError("scalar field has no evaluator");
  const double v = eval(t);
  if (!std::isfinite(v)) throw NumericError("scalar field evaluated to a non-finite value");
  return v;
}

ScalarField ScalarField::constant(double c) {
  return ScalarField{[c](double) { return c; }};
}

Vector VectorField::operator()(double t) const {
  if (!eval) throw UsageError("vector field has no evaluator");
  Vector v = eval(t);
  if (v.dim() != dim) throw UsageError("vector field evaluated to wrong dimension");
  if (!v.finite()) throw NumericError("vector field evaluated to non-finite values");
  return v;
}

VectorField VectorField::constant(Vector v) {
  const int d = v.dim();
  return VectorField{d, [v = std::move(v)](double) { return v; }};
}

VectorField VectorField::zero(int dim) {
  return constant(Vector::zero(dim));
}

double Polynomial::value(double t) const {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) {
    acc = acc * t + coeffs[i];
  }
  return acc;
}

Polynomial Polynomial::antiderivative() const {
  std::vector<double> c(coeffs.size() + 1, 0.0);
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    c[i + 1] = coeffs[i] / static_cast<double>(i + 1);
  }
  return Polynomial(std::move(c));
}

double Polynomial::integral(double a, double b) const {
  const Polynomial anti = antiderivative();
  return anti.value(b) - anti.value(a);
}

ScalarField Polynomial::field() const {
  return ScalarField{[p = *this](double t) { return p.value(t); }};
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.coeffs.empty() || b.coeffs.empty()) return Polynomial{};
  std::vector<double> c(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
    for (std::size_t j = 0; j < b.coeffs.size(); ++j) {
      c[i + j] += a.coeffs[i] * b.coeffs[j];
    }
  }
  return Polynomial(std::move(c));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) c[i] += a.coeffs[i];
  for (std::size_t i = 0; i < b.coeffs.size(); ++i) c[i] += b.coeffs[i];
  return Polynomial(std::move(c));
}

Vector PolyVectorField::value(double t) const {
  Vector v = Vector::zero(dim());
  for (int c = 0; c < dim(); ++c) v[c] = coords[static_cast<std::size_t>(c)].value(t);
  return v;
}

VectorField PolyVectorField::field() const {
  return VectorField{dim(), [f = *this](double t) { return f.value(t); }};
}

std::vector<double> lebesgue_prefix(const ScalarField& f, const TimeGrid& grid) {
  std::vector<double> out(static_cast<std::size_t>(grid.num_nodes()), 0.0);
  const double dt = grid.dt();
  double acc = 0.0;
  for (int i = 0; i < grid.steps(); ++i) {
    acc += f(grid.node(i)) * dt;
    if (!std::isfinite(acc)) throw NumericError("integral overflow in Riemann sum");
    out[static_cast<std::size_t>(i) + 1] = acc;
  }
  return out;
}

double lebesgue_scalar(const ScalarField& f, const TimeGrid& grid, double up_to) {
  const int k = grid.node_index(up_to);
  const double dt = grid.dt();
  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    acc += f(grid.node(i)) * dt;
    if (!std::isfinite(acc)) throw NumericError("integral overflow in Riemann sum");
  }
  return acc;
}

Vector coordinatewise_integral(const VectorField& field, const TimeGrid& grid, double up_to) {
  const int k = grid.node_index(up_to);
  const double dt = grid.dt();
  Vector acc = Vector::zero(field.dim);
  for (int i = 0; i < k; ++i) {
    const Vector v = field(grid.node(i));
    for (int c = 0; c < field.dim; ++c) acc[c] += v[c] * dt;
  }
  if (!acc.finite()) throw NumericError("integral overflow in Riemann sum");
  return acc;
}

Vector pettis_integral(const VectorField& field, const TimeGrid& grid, const DualFamily& family,
                       double up_to, double tol) {
  if (family.dim() != field.dim) throw UsageError("family dimension does not match field");
  std::vector<double> pairings(static_cast<std::size_t>(family.size()));
  for (int j = 0; j < family.size(); ++j) {
    const Functional& f = family.member(j);
    ScalarField paired{[&field, &f](double t) { return apply(f, field(t)); }};
    pairings[static_cast<std::size_t>(j)] = lebesgue_scalar(paired, grid, up_to);
  }
  return family.reconstruct(pairings, tol);
}

Vector pettis_integral_exact(const PolyVectorField& field, const DualFamily& family,
                             double up_to, double tol) {
  if (family.dim() != field.dim()) throw UsageError("family dimension does not match field");
  std::vector<double> pairings(static_cast<std::size_t>(family.size()));
  for (int j = 0; j < family.size(); ++j) {
    const Functional& f = family.member(j);
    // x*(Phi) is itself a polynomial; integrate it in closed form.
    Polynomial paired;
    for (int c = 0; c < field.dim(); ++c) {
      paired = paired + Polynomial{{f.coeffs[static_cast<std::size_t>(c)]}} *
                            field.coords[static_cast<std::size_t>(c)];
    }
    pairings[static_cast<std::size_t>(j)] = paired.integral(0.0, up_to);
  }
  return family.reconstruct(pairings, tol);
}

Vector bds_integral(const ScalarField& phi, const VectorMeasureDensity& measure,
                    const DualFamily& family, double up_to, double tol) {
  const VectorField& density = measure.density;
  VectorField product{density.dim, [&phi, &density](double t) {
                        Vector v = density(t);
                        const double s = phi(t);
                        for (int c = 0; c < v.dim(); ++c) v[c] *= s;
                        return v;
                      }};
  return pettis_integral(product, measure.grid, family, up_to, tol);
}

Vector bds_integral_exact(const Polynomial& phi, const PolyVectorField& density,
                          const DualFamily& family, double up_to, double tol) {
  std::vector<Polynomial> coords;
  coords.reserve(density.coords.size());
  for (const auto& c : density.coords) coords.push_back(phi * c);
  return pettis_integral_exact(PolyVectorField(std::move(coords)), family, up_to, tol);
}

namespace {

ScalarPath ito_sum(const ScalarPath& w, const std::function<double(int)>& integrand_at) {
  std::vector<double> out(w.values.size(), 0.0);
  double acc = 0.0;
  for (int i = 0; i < w.grid.steps(); ++i) {
    const std::size_t iu = static_cast<std::size_t>(i);
    acc += integrand_at(i) * (w.values[iu + 1] - w.values[iu]);
    if (!std::isfinite(acc)) throw NumericError("Ito sum overflow");
    out[iu + 1] = acc;
  }
  return ScalarPath(w.grid, std::move(out));
}

}  // namespace

ScalarPath ito_integral(const ScalarField& integrand, const ScalarPath& w) {
  return ito_sum(w, [&](int i) { return integrand(w.grid.node(i)); });
}

ScalarPath ito_integral(const ScalarPath& integrand, const ScalarPath& w) {
  if (!(integrand.grid == w.grid)) {
    throw UsageError("adapted integrand must live on the driving path's grid");
  }
  return ito_sum(w, [&](int i) { return integrand.values[static_cast<std::size_t>(i)]; });
}

ScalarPath ito_integral_adapted(const std::function<double(std::span<const double>)>& integrand,
                                const ScalarPath& w) {
  if (!integrand) throw UsageError("adapted integrand is empty");
  const std::span<const double> all(w.values);
  return ito_sum(w, [&](int i) {
    const double v = integrand(all.first(static_cast<std::size_t>(i) + 1));
    if (!std::isfinite(v)) throw NumericError("adapted integrand evaluated to non-finite value");
    return v;
  });
}

VecPath stochastic_pettis_integral(const VectorField& field, const ScalarPath& w,
                                   const DualFamily& family, double tol) {
  if (family.dim() != field.dim) throw UsageError("family dimension does not match field");
  const int m = family.size();
  const int nodes = w.grid.num_nodes();

  // Per-functional running Ito sums, then one reconstruction per node.
  std::vector<double> sums(static_cast<std::size_t>(m), 0.0);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(nodes));
  out.push_back(Vector::zero(field.dim));
  for (int i = 0; i < w.grid.steps(); ++i) {
    const Vector v = field(w.grid.node(i));
    const double dw = w.values[static_cast<std::size_t>(i) + 1] - w.values[static_cast<std::size_t>(i)];
    for (int j = 0; j < m; ++j) {
      sums[static_cast<std::size_t>(j)] += apply(family.member(j), v) * dw;
    }
    out.push_back(family.reconstruct(sums, tol));
  }
  return VecPath(w.grid, std::move(out));
}

VecPath pettis_prefix_path(const VectorField& field, const TimeGrid& grid,
                           const DualFamily& family, double tol) {
  if (family.dim() != field.dim) throw UsageError("family dimension does not match field");
  const int m = family.size();
  const double dt = grid.dt();
  std::vector<double> sums(static_cast<std::size_t>(m), 0.0);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(grid.num_nodes()));
  out.push_back(Vector::zero(field.dim));
  for (int i = 0; i < grid.steps(); ++i) {
    const Vector v = field(grid.node(i));
    for (int j = 0; j < m; ++j) {
      sums[static_cast<std::size_t>(j)] += apply(family.member(j), v) * dt;
    }
    out.push_back(family.reconstruct(sums, tol));
  }
  return VecPath(grid, std::move(out));
}

VecPath ito_pettis_path(const VectorField& psi, const VectorField& phi, const ScalarPath& w,
                        const DualFamily& family, double tol) {
  if (psi.dim != phi.dim) throw UsageError("drift and diffusion dimensions differ");
  if (family.dim() != psi.dim) throw UsageError("family dimension does not match fields");
  const int m = family.size();
  const double dt = w.grid.dt();

  std::vector<double> sums(static_cast<std::size_t>(m), 0.0);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(w.grid.num_nodes()));
  out.push_back(Vector::zero(psi.dim));
  for (int i = 0; i < w.grid.steps(); ++i) {
    const double t = w.grid.node(i);
    const Vector drift = psi(t);
    const Vector diff = phi(t);
    const double dw = w.values[static_cast<std::size_t>(i) + 1] - w.values[static_cast<std::size_t>(i)];
    for (int j = 0; j < m; ++j) {
      const Functional& f = family.member(j);
      sums[static_cast<std::size_t>(j)] += apply(f, drift) * dt + apply(f, diff) * dw;
    }
    out.push_back(family.reconstruct(sums, tol));
  }
  return VecPath(w.grid, std::move(out));
}

}  // namespace pettis
