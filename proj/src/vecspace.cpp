#include "pettis/vecspace.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <utility>

namespace pettis {

NormTag norm_tag_from_string(const std::string& s) {
  if (s == "L1") return NormTag::L1;
  if (s == "L2") return NormTag::L2;
  if (s == "LINF" || s == "LInf") return NormTag::LInf;
  throw UsageError("unknown norm tag: " + s);
}

std::string to_string(NormTag tag) {
  switch (tag) {
    case NormTag::L1: return "L1";
    case NormTag::L2: return "L2";
    case NormTag::LInf: return "LINF";
  }
  throw UsageError("invalid norm tag");
}

Vector::Vector(std::vector<double> c) : coords(std::move(c)) {
  if (!finite()) throw NumericError("vector has non-finite entries");
}

Vector Vector::zero(int dim) {
  if (dim < 1) throw UsageError("vector dimension must be >= 1");
  Vector v;
  v.coords.assign(static_cast<std::size_t>(dim), 0.0);
  return v;
}

bool Vector::finite() const {
  for (double x : coords) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

namespace {
void check_same_dim(int a, int b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw UsageError(os.str());
  }
}
}  // namespace

Vector operator+(const Vector& a, const Vector& b) {
  check_same_dim(a.dim(), b.dim(), "vector add");
  Vector r = a;
  for (int i = 0; i < r.dim(); ++i) r[i] += b[i];
  return r;
}

Vector operator-(const Vector& a, const Vector& b) {
  check_same_dim(a.dim(), b.dim(), "vector subtract");
  Vector r = a;
  for (int i = 0; i < r.dim(); ++i) r[i] -= b[i];
  return r;
}

Vector operator*(double c, const Vector& v) {
  Vector r = v;
  for (int i = 0; i < r.dim(); ++i) r[i] *= c;
  return r;
}

NormedSpace::NormedSpace(int d, NormTag tag) : dim(d), norm_tag(tag) {
  if (d < 1) throw UsageError("space dimension must be >= 1");
}

double NormedSpace::norm(const Vector& v) const {
  check_same_dim(v.dim(), dim, "norm");
  double acc = 0.0;
  switch (norm_tag) {
    case NormTag::L1:
      for (double x : v.coords) acc += std::abs(x);
      return acc;
    case NormTag::L2:
      for (double x : v.coords) acc += x * x;
      return std::sqrt(acc);
    case NormTag::LInf:
      for (double x : v.coords) acc = std::max(acc, std::abs(x));
      return acc;
  }
  throw UsageError("invalid norm tag");
}

Functional::Functional(std::vector<double> c) : coeffs(std::move(c)) {
  for (double x : coeffs) {
    if (!std::isfinite(x)) throw NumericError("functional has non-finite coefficients");
  }
}

double apply(const Functional& f, const Vector& v) {
  check_same_dim(f.dim(), v.dim(), "apply");
  double acc = 0.0;
  for (int i = 0; i < f.dim(); ++i) acc += f.coeffs[static_cast<std::size_t>(i)] * v[i];
  return acc;
}

DualFamily::DualFamily(std::vector<Functional> members, bool spanning)
    : members_(std::move(members)), spanning_(spanning) {
  if (members_.empty()) throw UsageError("dual family must have at least one member");
  dim_ = members_.front().dim();
  if (dim_ < 1) throw UsageError("dual family members must have dimension >= 1");
  for (const auto& f : members_) {
    check_same_dim(f.dim(), dim_, "dual family");
  }
  if (!spanning_) return;

  const int m = size();
  if (m < dim_) {
    throw UsageError("spanning dual family needs at least dim members");
  }
  for (const auto& f : members_) {
    bool all_zero = true;
    for (double c : f.coeffs) all_zero = all_zero && c == 0.0;
    if (all_zero) throw UsageError("spanning dual family must not contain the zero functional");
  }
  Eigen::MatrixXd a(m, dim_);
  for (int j = 0; j < m; ++j) {
    for (int c = 0; c < dim_; ++c) {
      a(j, c) = members_[static_cast<std::size_t>(j)].coeffs[static_cast<std::size_t>(c)];
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double cutoff = kSpanningRankTol * sigma(0);
  int rank = 0;
  for (int i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) ++rank;
  }
  if (rank < dim_) {
    throw UsageError("dual family is rank deficient, cannot span the space");
  }
  // pinv = V diag(1/sigma) U^T, d x m
  Eigen::MatrixXd pinv = svd.matrixV() * sigma.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  pinv_.resize(static_cast<std::size_t>(dim_) * static_cast<std::size_t>(m));
  for (int c = 0; c < dim_; ++c) {
    for (int j = 0; j < m; ++j) {
      pinv_[static_cast<std::size_t>(c) * static_cast<std::size_t>(m) + static_cast<std::size_t>(j)] = pinv(c, j);
    }
  }
}

DualFamily DualFamily::standard_basis(int dim) {
  if (dim < 1) throw UsageError("dimension must be >= 1");
  std::vector<Functional> fs;
  fs.reserve(static_cast<std::size_t>(dim));
  for (int j = 0; j < dim; ++j) {
    std::vector<double> c(static_cast<std::size_t>(dim), 0.0);
    c[static_cast<std::size_t>(j)] = 1.0;
    fs.emplace_back(std::move(c));
  }
  return DualFamily(std::move(fs), true);
}

DualFamily DualFamily::triangular_ones(int dim) {
  if (dim < 1) throw UsageError("dimension must be >= 1");
  std::vector<Functional> fs;
  fs.reserve(static_cast<std::size_t>(dim));
  for (int j = 0; j < dim; ++j) {
    std::vector<double> c(static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i <= j; ++i) c[static_cast<std::size_t>(i)] = 1.0;
    fs.emplace_back(std::move(c));
  }
  return DualFamily(std::move(fs), true);
}

Vector DualFamily::reconstruct(std::span<const double> pairings, double tol) const {
  if (!spanning_) {
    throw UsageError("reconstruct requires a spanning dual family");
  }
  const int m = size();
  if (static_cast<int>(pairings.size()) != m) {
    throw UsageError("pairings length does not match family size");
  }
  for (double p : pairings) {
    if (!std::isfinite(p)) throw NumericError("pairings contain non-finite values");
  }
  Vector v = Vector::zero(dim_);
  for (int c = 0; c < dim_; ++c) {
    const double* row = pinv_.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(m);
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += row[j] * pairings[static_cast<std::size_t>(j)];
    v[c] = acc;
  }
  const double res = residual(pairings, v);
  if (!(res <= tol)) {
    std::ostringstream os;
    os << "pairings are not realized by any single vector (residual " << res
       << " > tol " << tol << ")";
    throw PettisPropertyError(os.str());
  }
  return v;
}

double DualFamily::residual(std::span<const double> pairings, const Vector& v) const {
  const int m = size();
  if (static_cast<int>(pairings.size()) != m) {
    throw UsageError("pairings length does not match family size");
  }
  double worst = 0.0;
  for (int j = 0; j < m; ++j) {
    const double r = std::abs(apply(members_[static_cast<std::size_t>(j)], v) -
                              pairings[static_cast<std::size_t>(j)]);
    worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace pettis
