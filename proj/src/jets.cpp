#include "whitham/jets.hpp"

#include <cmath>
#include <stdexcept>

namespace whitham::jets {

JetField::JetField(std::vector<RealField> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw std::invalid_argument("a jet needs at least one coefficient");
  for (const auto& c : coeffs_) coeffs_.front().require_same_grid(c);
}

JetField JetField::zero(const Grid1D& grid, unsigned order) {
  return JetField(std::vector<RealField>(order + 1, RealField(grid)));
}

JetField JetField::constant(const RealField& f, unsigned order) {
  auto j = zero(f.grid(), order);
  j[0] = f;
  return j;
}

RealField JetField::evaluate(Real eps) const {
  // Horner in eps^2
  const Real e2 = eps * eps;
  RealField acc = coeffs_.back();
  for (std::size_t l = coeffs_.size() - 1; l-- > 0;) {
    acc *= e2;
    acc += coeffs_[l];
  }
  return acc;
}

JetField JetField::shifted() const {
  std::vector<RealField> c;
  c.reserve(coeffs_.size());
  c.emplace_back(grid());
  for (std::size_t l = 0; l + 1 < coeffs_.size(); ++l) c.push_back(coeffs_[l]);
  return JetField(std::move(c));
}

void JetField::require_compatible(const JetField& o) const {
  if (order() != o.order()) {
    throw std::invalid_argument("jet orders differ: " + std::to_string(order()) + " vs " + std::to_string(o.order()));
  }
  coeffs_.front().require_same_grid(o.coeffs_.front());
}

JetField& JetField::operator+=(const JetField& o) {
  require_compatible(o);
  for (std::size_t l = 0; l < coeffs_.size(); ++l) coeffs_[l] += o.coeffs_[l];
  return *this;
}

JetField& JetField::operator-=(const JetField& o) {
  require_compatible(o);
  for (std::size_t l = 0; l < coeffs_.size(); ++l) coeffs_[l] -= o.coeffs_[l];
  return *this;
}

JetField& JetField::operator*=(Real c) {
  for (auto& f : coeffs_) f *= c;
  return *this;
}

JetField& JetField::operator+=(Real c) {
  coeffs_.front() += c;
  return *this;
}

JetField operator+(JetField a, const JetField& b) { return a += b; }
JetField operator-(JetField a, const JetField& b) { return a -= b; }
JetField operator*(Real c, JetField a) { return a *= c; }
JetField operator+(JetField a, Real c) { return a += c; }

JetField jet_add(const JetField& a, const JetField& b) { return a + b; }

JetField jet_mul(const JetField& a, const JetField& b) {
  a.require_compatible(b);
  auto out = JetField::zero(a.grid(), a.order());
  for (unsigned l = 0; l <= a.order(); ++l) {
    for (unsigned i = 0; i <= l; ++i) out[l] += dealiased_product(a[i], b[l - i]);
  }
  return out;
}

JetField jet_exp(const JetField& a, Real scale) {
  // b = exp(A), A = scale * a:  b_0 = e^{A_0},  m b_m = sum_{j=1..m} j A_j b_{m-j}
  const JetField A = scale * a;
  auto b = JetField::zero(a.grid(), a.order());
  b[0] = dealiased_exp(A[0]);
  for (unsigned m = 1; m <= a.order(); ++m) {
    RealField acc(a.grid());
    for (unsigned j = 1; j <= m; ++j) acc += static_cast<Real>(j) * dealiased_product(A[j], b[m - j]);
    b[m] = (Real(1) / static_cast<Real>(m)) * acc;
  }
  return b;
}

JetField jet_derivative(const JetField& a, int order) {
  std::vector<RealField> c;
  c.reserve(a.order() + 1);
  for (const auto& f : a.coeffs()) c.push_back(spectral_derivative(f, order));
  return JetField(std::move(c));
}

std::pair<JetField, JetField> jet_defect_swe(const JetField& rj, const JetField& uj, Real k,
                                             const JetField& rj_T, const JetField& uj_T) {
  rj.require_compatible(uj);
  rj.require_compatible(rj_T);
  rj.require_compatible(uj_T);

  const JetField r_x = jet_derivative(rj, 1);
  const JetField carrier = uj + k;

  JetField d_r = rj_T + jet_derivative(uj, 1) + Real(2) * jet_mul(carrier, r_x);

  const JetField dispersive = jet_derivative(rj, 3) + jet_derivative(jet_mul(r_x, r_x), 1);
  JetField d_u = uj_T + jet_derivative(jet_mul(carrier, carrier), 1) + jet_derivative(jet_exp(rj, 2), 1) -
                 dispersive.shifted();
  return {std::move(d_r), std::move(d_u)};
}

}  // namespace whitham::jets
