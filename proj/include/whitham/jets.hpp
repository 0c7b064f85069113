#pragma once

/// @file jets.hpp
/// @brief Truncated power series in eps^2 with field-valued coefficients.
///
/// A JetField of order n stores c_0 + eps^2 c_1 + ... + eps^{2n} c_n. Products
/// close at the stored order. The correction hierarchy is represented as a
/// pair of jets (r-hat, u-hat), and the forcing of every level is read off the
/// defect jet produced by jet_defect_swe.

#include <utility>
#include <vector>

#include "whitham/field.hpp"

namespace whitham::jets {

class JetField {
 public:
  explicit JetField(std::vector<RealField> coeffs);

  static JetField zero(const Grid1D& grid, unsigned order);
  /// f + 0 eps^2 + ... at the given order.
  static JetField constant(const RealField& f, unsigned order);

  unsigned order() const noexcept { return static_cast<unsigned>(coeffs_.size() - 1); }
  const Grid1D& grid() const noexcept { return coeffs_.front().grid(); }
  const RealField& operator[](std::size_t l) const { return coeffs_.at(l); }
  RealField& operator[](std::size_t l) { return coeffs_.at(l); }
  const std::vector<RealField>& coeffs() const noexcept { return coeffs_; }

  /// sum_l eps^{2l} c_l
  RealField evaluate(Real eps) const;

  /// Multiplication by eps^2: slot l moves to l+1, the top slot is dropped.
  JetField shifted() const;

  JetField& operator+=(const JetField& o);
  JetField& operator-=(const JetField& o);
  JetField& operator*=(Real c);
  /// Adds a constant to the eps^0 coefficient.
  JetField& operator+=(Real c);

  void require_compatible(const JetField& o) const;

 private:
  std::vector<RealField> coeffs_;
};

JetField operator+(JetField a, const JetField& b);
JetField operator-(JetField a, const JetField& b);
JetField operator*(Real c, JetField a);
JetField operator+(JetField a, Real c);

JetField jet_add(const JetField& a, const JetField& b);

/// Cauchy product truncated at the common order; coefficient products are dealiased.
JetField jet_mul(const JetField& a, const JetField& b);

/// exp(scale * a) via exp(scale a_0) times the series of the eps^2 part.
JetField jet_exp(const JetField& a, Real scale);

/// Coefficient-wise spectral derivative.
JetField jet_derivative(const JetField& a, int order = 1);

/// Defect jets of the eps^2-perturbed shallow-water system written in (r, u):
///
///   d_r = r_T + u_X + 2 (u + k) r_X
///   d_u = u_T + ((k + u)^2)_X + (e^{2r})_X - eps^2 (r_XXX + ((r_X)^2)_X)
///
/// with gamma = -1 and the explicit eps^2 factors realised by a one-slot shift.
/// Coefficient l vanishes when the level equations at l hold; with the level-l
/// slots left empty it equals minus that level's forcing.
std::pair<JetField, JetField> jet_defect_swe(const JetField& rj, const JetField& uj, Real k,
                                             const JetField& rj_T, const JetField& uj_T);

}  // namespace whitham::jets
