#pragma once

// Fibered charts (x^s, y^i_a) on finite-order jet spaces, total derivatives
// and the contact/horizontal bigraded forms.

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jetvar/expr.hpp"

namespace jetvar {

/// Derivative counts per base coordinate. Ordered graded-lexicographically.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> counts);
  static MultiIndex zero(int n);
  static MultiIndex unit(int n, int sigma);

  int dim() const { return static_cast<int>(c_.size()); }
  int order() const;
  int operator[](int sigma) const { return c_[sigma]; }
  const std::vector<int>& counts() const { return c_; }

  MultiIndex operator+(const MultiIndex& o) const;
  /// Componentwise difference; requires o <= *this componentwise.
  MultiIndex operator-(const MultiIndex& o) const;
  bool divides(const MultiIndex& o) const;  // componentwise <=
  long factorial() const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b);

 private:
  std::vector<int> c_;
};

/// All multi-indices of dimension n with order <= max_order, graded order.
std::vector<MultiIndex> multi_indices(int n, int max_order);

/// binom(gamma, beta) = prod binom(gamma_s, beta_s).
long binomial(const MultiIndex& gamma, const MultiIndex& beta);

struct JetKey {
  int field = 0;
  MultiIndex alpha;
  friend bool operator==(const JetKey&, const JetKey&) = default;
  friend auto operator<=>(const JetKey&, const JetKey&) = default;
};

/// The chart of a fibered manifold pi: Y -> X and its jet prolongations.
/// Coordinates of any order up to the cap are available on demand.
class JetBundle {
 public:
  JetBundle(std::vector<std::string> base, std::vector<std::string> fields, int order = 1, int cap = -1);

  int n() const { return static_cast<int>(base_.size()); }
  int m() const { return static_cast<int>(fields_.size()); }
  int order() const { return order_; }
  int cap() const { return cap_; }
  JetBundle with_cap(int cap) const;
  /// Raises the cap to at least 4 * order + 1.
  JetBundle with_order(int order) const;

  const std::string& base_name(int sigma) const { return base_[sigma]; }
  const std::string& field_name(int i) const { return fields_[i]; }
  const std::vector<std::string>& base_names() const { return base_; }
  const std::vector<std::string>& field_names() const { return fields_; }
  std::optional<int> field_index(const std::string& name) const;
  std::optional<int> base_index(const std::string& name) const;

  void mark_angle(int i, bool angle = true);
  bool is_angle(int i) const { return angle_[i]; }

  Expr base(int sigma) const;
  /// y^i_alpha. Throws Error("jet order cap exceeded") above the cap.
  Expr coord(int field, const MultiIndex& alpha) const;
  Expr coord(const JetKey& k) const { return coord(k.field, k.alpha); }
  Expr field(int i) const { return coord(i, MultiIndex::zero(n())); }
  std::string coord_name(int field, const MultiIndex& alpha) const;

  /// Decodes a jet coordinate symbol of this bundle.
  std::optional<JetKey> decode(const Expr& symbol) const;
  /// Resolves identifiers such as "y", "y_tt", "y_{tx}" or a base name.
  std::optional<Expr> resolve(const std::string& identifier) const;

  /// Product bundle Y x_X V: the fields followed by variation fields named
  /// `names` (default "eta" for one field, "eta1".. otherwise).
  JetBundle adjoin(std::vector<std::string> names = {}) const;

  MultiIndex zero() const { return MultiIndex::zero(n()); }
  MultiIndex unit(int sigma) const { return MultiIndex::unit(n(), sigma); }

 private:
  std::vector<std::string> base_;
  std::vector<std::string> fields_;
  std::vector<bool> angle_;
  int order_;
  int cap_;
};

/// Jet coordinates (of this bundle) occurring in e, in canonical order.
std::vector<JetKey> jet_keys(const JetBundle& bundle, const Expr& e);

/// Highest jet order occurring in e (0 if none).
int jet_order(const JetBundle& bundle, const Expr& e);

/// D_sigma e = d_sigma e + sum y^j_{a+sigma} de/dy^j_a.
Expr total_derivative(const JetBundle& bundle, const Expr& e, int sigma);
Expr total_derivative(const JetBundle& bundle, const Expr& e, const MultiIndex& alpha);

/// Section y^i = s^i(x): bindings of every jet coordinate up to max_order.
Bindings section_bindings(const JetBundle& bundle, const std::map<int, Expr>& section, int max_order);

/// Pullback of a function by the prolonged section.
Expr pullback(const JetBundle& bundle, const Expr& e, const std::map<int, Expr>& section);

struct FormFactor {
  enum class Type : std::uint8_t { Contact, Diff, Base };
  Type type = Type::Base;
  int field = 0;  // Contact/Diff
  MultiIndex alpha;
  int base = 0;  // Base

  static FormFactor theta(int field, MultiIndex alpha);
  static FormFactor dy(int field, MultiIndex alpha);
  static FormFactor dx(int sigma);

  friend bool operator==(const FormFactor&, const FormFactor&) = default;
  friend std::strong_ordering operator<=>(const FormFactor& a, const FormFactor& b);
};

/// Formal sum of coefficient * wedge of basis one-forms, kept canonical:
/// factors sorted (contact, then dy, then dx), signs by permutation parity,
/// repeated factors dropped, coefficients normalized and nonzero.
class BigradedForm {
 public:
  using Factors = std::vector<FormFactor>;

  BigradedForm() = default;
  static BigradedForm scalar(const Expr& f);
  static BigradedForm basis(const FormFactor& f);
  static BigradedForm volume(const JetBundle& bundle);

  const std::map<Factors, Expr>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Coefficient of the given canonical factor list (0 if absent).
  Expr coefficient(const Factors& factors) const;

  void add_term(Factors factors, const Expr& coeff);

  BigradedForm operator+(const BigradedForm& o) const;
  BigradedForm operator-(const BigradedForm& o) const;
  BigradedForm operator*(const Expr& f) const;
  BigradedForm wedge(const BigradedForm& o) const;

  /// (contact degree, horizontal degree) of every term.
  std::vector<std::pair<int, int>> degrees() const;

  friend bool operator==(const BigradedForm& a, const BigradedForm& b);

 private:
  std::map<Factors, Expr> terms_;
};

/// Rewrites dy^i_a as theta^i_a + y^i_{a+s} dx^s.
BigradedForm to_contact_basis(const JetBundle& bundle, const BigradedForm& w);
BigradedForm d_H(const JetBundle& bundle, const BigradedForm& w);
BigradedForm d_V(const JetBundle& bundle, const BigradedForm& w);
BigradedForm horizontalize(const JetBundle& bundle, const BigradedForm& w);

/// A vector field on the jet space in split form u = xi^s D_s + V^i_a d/dy^i_a.
struct JetVectorField {
  std::vector<Expr> horizontal;        // xi^s
  std::map<JetKey, Expr> vertical;     // V^i_a; missing entries are 0
  Expr vertical_at(const JetKey& k) const;
};

/// Graded interior product. Throws Error("cannot contract scalar") on a
/// degree-0 input.
BigradedForm contract(const JetBundle& bundle, const BigradedForm& w, const JetVectorField& u);

/// Pullback by a prolonged section: contact terms vanish.
BigradedForm pullback(const JetBundle& bundle, const BigradedForm& w, const std::map<int, Expr>& section);

std::string to_plain(const JetBundle& bundle, const BigradedForm& w);

}  // namespace jetvar
