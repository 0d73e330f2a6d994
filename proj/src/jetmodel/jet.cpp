#include "jetvar/jet.hpp"
#include "jetvar/syntax.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace jetvar {

// -------------------------------------------------------------- MultiIndex

MultiIndex::MultiIndex(std::vector<int> counts) : c_(std::move(counts)) {
  for (int v : c_)
    if (v < 0) throw Error("negative multi-index entry");
}

MultiIndex MultiIndex::zero(int n) { return MultiIndex(std::vector<int>(n, 0)); }

MultiIndex MultiIndex::unit(int n, int sigma) {
  std::vector<int> c(n, 0);
  c.at(sigma) = 1;
  return MultiIndex(std::move(c));
}

int MultiIndex::order() const { return std::accumulate(c_.begin(), c_.end(), 0); }

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  std::vector<int> c = c_;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c_[i];
  return MultiIndex(std::move(c));
}

MultiIndex MultiIndex::operator-(const MultiIndex& o) const {
  std::vector<int> c = c_;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c_[i];
  return MultiIndex(std::move(c));
}

bool MultiIndex::divides(const MultiIndex& o) const {
  for (std::size_t i = 0; i < c_.size(); ++i)
    if (c_[i] > o.c_[i]) return false;
  return true;
}

long MultiIndex::factorial() const {
  long f = 1;
  for (int v : c_)
    for (int k = 2; k <= v; ++k) f *= k;
  return f;
}

std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
  if (auto c = a.order() <=> b.order(); c != 0) return c;
  return std::lexicographical_compare_three_way(b.c_.begin(), b.c_.end(), a.c_.begin(), a.c_.end());
}

std::vector<MultiIndex> multi_indices(int n, int max_order) {
  std::vector<MultiIndex> out;
  std::vector<int> c(n, 0);
  // Enumerate by total order, recursively distributing counts.
  for (int k = 0; k <= max_order; ++k) {
    std::vector<int> cur(n, 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
      if (pos == n - 1) {
        cur[pos] = left;
        out.emplace_back(cur);
        return;
      }
      for (int v = left; v >= 0; --v) {
        cur[pos] = v;
        self(self, pos + 1, left - v);
      }
    };
    rec(rec, 0, k);
  }
  return out;
}

long binomial(const MultiIndex& gamma, const MultiIndex& beta) {
  long r = 1;
  for (int s = 0; s < gamma.dim(); ++s) {
    int g = gamma[s], b = beta[s];
    if (b < 0 || b > g) return 0;
    long c = 1;
    for (int k = 1; k <= b; ++k) c = c * (g - b + k) / k;
    r *= c;
  }
  return r;
}

// --------------------------------------------------------------- JetBundle

JetBundle::JetBundle(std::vector<std::string> base, std::vector<std::string> fields, int order, int cap)
    : base_(std::move(base)), fields_(std::move(fields)), angle_(fields_.size(), false), order_(order) {
  if (base_.empty()) throw Error("a jet bundle needs at least one base coordinate");
  if (fields_.empty()) throw Error("a jet bundle needs at least one field");
  if (order_ < 0) throw Error("negative jet order");
  cap_ = cap < 0 ? 4 * order_ + 1 : cap;
  std::set<std::string> seen;
  for (const auto& name : base_)
    if (!seen.insert(name).second) throw Error("duplicate coordinate name '" + name + "'");
  for (const auto& name : fields_)
    if (!seen.insert(name).second) throw Error("duplicate coordinate name '" + name + "'");
}

JetBundle JetBundle::with_cap(int cap) const {
  JetBundle b = *this;
  b.cap_ = cap;
  return b;
}

JetBundle JetBundle::with_order(int order) const {
  JetBundle b = *this;
  b.order_ = order;
  b.cap_ = std::max(cap_, 4 * order + 1);
  return b;
}

std::optional<int> JetBundle::field_index(const std::string& name) const {
  for (int i = 0; i < m(); ++i)
    if (fields_[i] == name) return i;
  return std::nullopt;
}

std::optional<int> JetBundle::base_index(const std::string& name) const {
  for (int s = 0; s < n(); ++s)
    if (base_[s] == name) return s;
  return std::nullopt;
}

void JetBundle::mark_angle(int i, bool angle) { angle_.at(i) = angle; }

Expr JetBundle::base(int sigma) const {
  SymbolInfo s;
  s.cls = SymbolClass::Base;
  s.name = base_.at(sigma);
  s.index = sigma;
  return Expr::symbol(std::move(s));
}

std::string JetBundle::coord_name(int field, const MultiIndex& alpha) const {
  if (alpha.order() == 0) return fields_.at(field);
  std::string suffix;
  for (int s = 0; s < n(); ++s)
    for (int k = 0; k < alpha[s]; ++k) suffix += base_[s];
  return fields_.at(field) + "_" + suffix;
}

Expr JetBundle::coord(int field, const MultiIndex& alpha) const {
  if (field < 0 || field >= m()) throw Error("field index out of range");
  if (alpha.dim() != n()) throw Error("multi-index dimension mismatch");
  if (alpha.order() > cap_)
    throw Error("jet order cap exceeded: order " + std::to_string(alpha.order()) + " > cap " + std::to_string(cap_));
  SymbolInfo s;
  s.cls = SymbolClass::Jet;
  s.index = field;
  s.alpha = alpha.counts();
  s.stem = fields_[field];
  s.name = coord_name(field, alpha);
  s.suffix = s.name.size() > s.stem.size() ? s.name.substr(s.stem.size() + 1) : "";
  return Expr::symbol(std::move(s));
}

std::optional<JetKey> JetBundle::decode(const Expr& symbol) const {
  if (!symbol.is_symbol()) return std::nullopt;
  const SymbolInfo& s = symbol.symbol();
  if (s.cls != SymbolClass::Jet) return std::nullopt;
  if (s.index < 0 || s.index >= m() || fields_[s.index] != s.stem || static_cast<int>(s.alpha.size()) != n())
    return std::nullopt;
  return JetKey{s.index, MultiIndex(s.alpha)};
}

std::optional<Expr> JetBundle::resolve(const std::string& identifier) const {
  if (auto s = base_index(identifier)) return base(*s);
  if (auto i = field_index(identifier)) return field(*i);
  auto us = identifier.find('_');
  if (us == std::string::npos) return std::nullopt;
  auto i = field_index(identifier.substr(0, us));
  if (!i) return std::nullopt;
  std::string suffix = identifier.substr(us + 1);
  if (suffix.size() >= 2 && suffix.front() == '{' && suffix.back() == '}') suffix = suffix.substr(1, suffix.size() - 2);
  std::vector<int> counts(n(), 0);
  std::size_t pos = 0;
  while (pos < suffix.size()) {
    int best = -1;
    std::size_t best_len = 0;
    for (int s = 0; s < n(); ++s) {
      const auto& b = base_[s];
      if (b.size() > best_len && suffix.compare(pos, b.size(), b) == 0) {
        best = s;
        best_len = b.size();
      }
    }
    if (best < 0) return std::nullopt;
    ++counts[best];
    pos += best_len;
  }
  MultiIndex alpha(counts);
  if (alpha.order() == 0) return std::nullopt;
  return coord(*i, alpha);
}

JetBundle JetBundle::adjoin(std::vector<std::string> names) const {
  if (names.empty()) {
    if (m() == 1) {
      names.push_back("eta");
    } else {
      for (int i = 1; i <= m(); ++i) names.push_back("eta" + std::to_string(i));
    }
  }
  if (static_cast<int>(names.size()) != m()) throw Error("variation field count mismatch");
  std::vector<std::string> fields = fields_;
  fields.insert(fields.end(), names.begin(), names.end());
  JetBundle b(base_, fields, order_, cap_);
  for (int i = 0; i < m(); ++i) b.angle_[i] = angle_[i];
  return b;
}

// ------------------------------------------------------ functions on jets

std::vector<JetKey> jet_keys(const JetBundle& bundle, const Expr& e) {
  std::vector<JetKey> out;
  for (const auto& s : free_symbols(e))
    if (auto k = bundle.decode(s)) out.push_back(*k);
  std::sort(out.begin(), out.end());
  return out;
}

int jet_order(const JetBundle& bundle, const Expr& e) {
  int k = 0;
  for (const auto& key : jet_keys(bundle, e)) k = std::max(k, key.alpha.order());
  return k;
}

Expr total_derivative(const JetBundle& bundle, const Expr& e, int sigma) {
  return derive(e, [&](const Expr& s) -> Expr {
    const SymbolInfo& info = s.symbol();
    if (info.cls == SymbolClass::Base) return info.index == sigma && info.name == bundle.base_name(sigma) ? Expr(1) : Expr(0);
    if (auto k = bundle.decode(s)) return bundle.coord(k->field, k->alpha + bundle.unit(sigma));
    return Expr(0);
  });
}

Expr total_derivative(const JetBundle& bundle, const Expr& e, const MultiIndex& alpha) {
  Expr r = e;
  for (int s = 0; s < bundle.n(); ++s)
    for (int k = 0; k < alpha[s]; ++k) r = total_derivative(bundle, r, s);
  return r;
}

Bindings section_bindings(const JetBundle& bundle, const std::map<int, Expr>& section, int max_order) {
  Bindings out;
  for (const auto& [i, s] : section) {
    std::map<MultiIndex, Expr> derived;
    for (const auto& alpha : multi_indices(bundle.n(), max_order)) {
      Expr v;
      if (alpha.order() == 0) {
        v = normalize(s);
      } else {
        int sigma = 0;
        while (alpha[sigma] == 0) ++sigma;
        v = partial(derived.at(alpha - bundle.unit(sigma)), bundle.base(sigma));
      }
      derived.emplace(alpha, v);
      out[bundle.coord_name(i, alpha)] = v;
    }
  }
  return out;
}

Expr pullback(const JetBundle& bundle, const Expr& e, const std::map<int, Expr>& section) {
  return substitute(e, section_bindings(bundle, section, jet_order(bundle, e)));
}

// ------------------------------------------------------------------- forms

FormFactor FormFactor::theta(int field, MultiIndex alpha) { return {Type::Contact, field, std::move(alpha), 0}; }
FormFactor FormFactor::dy(int field, MultiIndex alpha) { return {Type::Diff, field, std::move(alpha), 0}; }
FormFactor FormFactor::dx(int sigma) { return {Type::Base, 0, {}, sigma}; }

std::strong_ordering operator<=>(const FormFactor& a, const FormFactor& b) {
  if (auto c = a.type <=> b.type; c != 0) return c;
  if (a.type == FormFactor::Type::Base) return a.base <=> b.base;
  if (auto c = a.field <=> b.field; c != 0) return c;
  return a.alpha <=> b.alpha;
}

namespace {

// Sorts factors, returning the permutation sign, or 0 on a repeat.
int canonicalize(BigradedForm::Factors& f) {
  int sign = 1;
  for (std::size_t i = 1; i < f.size(); ++i) {
    for (std::size_t j = i; j > 0 && f[j] < f[j - 1]; --j) {
      std::swap(f[j], f[j - 1]);
      sign = -sign;
    }
  }
  for (std::size_t i = 1; i < f.size(); ++i)
    if (f[i] == f[i - 1]) return 0;
  return sign;
}

}  // namespace

BigradedForm BigradedForm::scalar(const Expr& f) {
  BigradedForm w;
  w.add_term({}, f);
  return w;
}

BigradedForm BigradedForm::basis(const FormFactor& f) {
  BigradedForm w;
  w.add_term({f}, Expr(1));
  return w;
}

BigradedForm BigradedForm::volume(const JetBundle& bundle) {
  Factors f;
  for (int s = 0; s < bundle.n(); ++s) f.push_back(FormFactor::dx(s));
  BigradedForm w;
  w.add_term(std::move(f), Expr(1));
  return w;
}

Expr BigradedForm::coefficient(const Factors& factors) const {
  auto it = terms_.find(factors);
  return it == terms_.end() ? Expr(0) : it->second;
}

void BigradedForm::add_term(Factors factors, const Expr& coeff) {
  int sign = canonicalize(factors);
  if (sign == 0) return;
  Expr c = sign > 0 ? coeff : -coeff;
  auto it = terms_.find(factors);
  Expr total = normalize(it == terms_.end() ? c : it->second + c);
  if (total.is_zero()) {
    if (it != terms_.end()) terms_.erase(it);
  } else if (it == terms_.end()) {
    terms_.emplace(std::move(factors), total);
  } else {
    it->second = total;
  }
}

BigradedForm BigradedForm::operator+(const BigradedForm& o) const {
  BigradedForm r = *this;
  for (const auto& [f, c] : o.terms_) r.add_term(f, c);
  return r;
}

BigradedForm BigradedForm::operator-(const BigradedForm& o) const { return *this + o * Expr(-1); }

BigradedForm BigradedForm::operator*(const Expr& f) const {
  BigradedForm r;
  for (const auto& [fs, c] : terms_) r.add_term(fs, c * f);
  return r;
}

BigradedForm BigradedForm::wedge(const BigradedForm& o) const {
  BigradedForm r;
  for (const auto& [fa, ca] : terms_) {
    for (const auto& [fb, cb] : o.terms_) {
      Factors f = fa;
      f.insert(f.end(), fb.begin(), fb.end());
      r.add_term(std::move(f), ca * cb);
    }
  }
  return r;
}

std::vector<std::pair<int, int>> BigradedForm::degrees() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& [f, c] : terms_) {
    int p = 0, q = 0;
    for (const auto& x : f) (x.type == FormFactor::Type::Base ? q : p)++;
    out.emplace_back(p, q);
  }
  return out;
}

bool operator==(const BigradedForm& a, const BigradedForm& b) {
  if (a.terms_.size() != b.terms_.size()) return false;
  for (auto ia = a.terms_.begin(), ib = b.terms_.begin(); ia != a.terms_.end(); ++ia, ++ib)
    if (ia->first != ib->first || !(ia->second == ib->second)) return false;
  return true;
}

BigradedForm to_contact_basis(const JetBundle& bundle, const BigradedForm& w) {
  BigradedForm out;
  for (const auto& [factors, c] : w.terms()) {
    BigradedForm acc = BigradedForm::scalar(c);
    for (const auto& f : factors) {
      if (f.type != FormFactor::Type::Diff) {
        acc = acc.wedge(BigradedForm::basis(f));
        continue;
      }
      BigradedForm dy = BigradedForm::basis(FormFactor::theta(f.field, f.alpha));
      for (int s = 0; s < bundle.n(); ++s)
        dy = dy + BigradedForm::basis(FormFactor::dx(s)) * bundle.coord(f.field, f.alpha + bundle.unit(s));
      acc = acc.wedge(dy);
    }
    out = out + acc;
  }
  return out;
}

namespace {

// d of a basis factor in the contact basis, split by bidegree.
BigradedForm d_factor(const JetBundle& bundle, const FormFactor& f, bool horizontal) {
  BigradedForm r;
  if (f.type == FormFactor::Type::Contact && horizontal) {
    for (int s = 0; s < bundle.n(); ++s)
      r.add_term({FormFactor::theta(f.field, f.alpha + bundle.unit(s)), FormFactor::dx(s)}, Expr(-1));
  }
  return r;
}

BigradedForm d_scalar(const JetBundle& bundle, const Expr& c, bool horizontal) {
  BigradedForm r;
  if (horizontal) {
    for (int s = 0; s < bundle.n(); ++s) r.add_term({FormFactor::dx(s)}, total_derivative(bundle, c, s));
  } else {
    for (const auto& k : jet_keys(bundle, c))
      r.add_term({FormFactor::theta(k.field, k.alpha)}, partial(c, bundle.coord(k)));
  }
  return r;
}

BigradedForm d_split(const JetBundle& bundle, const BigradedForm& w, bool horizontal) {
  BigradedForm in = to_contact_basis(bundle, w);
  BigradedForm out;
  for (const auto& [factors, c] : in.terms()) {
    BigradedForm rest;
    rest.add_term(factors, Expr(1));
    out = out + d_scalar(bundle, c, horizontal).wedge(rest);
    for (std::size_t j = 0; j < factors.size(); ++j) {
      BigradedForm df = d_factor(bundle, factors[j], horizontal);
      if (df.is_zero()) continue;
      BigradedForm left, right;
      left.add_term(BigradedForm::Factors(factors.begin(), factors.begin() + j), c * Expr(j % 2 ? -1 : 1));
      right.add_term(BigradedForm::Factors(factors.begin() + j + 1, factors.end()), Expr(1));
      out = out + left.wedge(df).wedge(right);
    }
  }
  return out;
}

}  // namespace

BigradedForm d_H(const JetBundle& bundle, const BigradedForm& w) { return d_split(bundle, w, true); }
BigradedForm d_V(const JetBundle& bundle, const BigradedForm& w) { return d_split(bundle, w, false); }

BigradedForm horizontalize(const JetBundle& bundle, const BigradedForm& w) {
  BigradedForm out;
  BigradedForm in = to_contact_basis(bundle, w);
  for (const auto& [factors, c] : in.terms()) {
    bool contact = std::any_of(factors.begin(), factors.end(),
                               [](const FormFactor& f) { return f.type != FormFactor::Type::Base; });
    if (!contact) out.add_term(factors, c);
  }
  return out;
}

Expr JetVectorField::vertical_at(const JetKey& k) const {
  auto it = vertical.find(k);
  return it == vertical.end() ? Expr(0) : it->second;
}

BigradedForm contract(const JetBundle& bundle, const BigradedForm& w, const JetVectorField& u) {
  BigradedForm out;
  for (const auto& [factors, c] : w.terms()) {
    if (factors.empty()) throw Error("cannot contract scalar");
    for (std::size_t j = 0; j < factors.size(); ++j) {
      const FormFactor& f = factors[j];
      Expr pairing;
      switch (f.type) {
        case FormFactor::Type::Base:
          pairing = f.base < static_cast<int>(u.horizontal.size()) ? u.horizontal[f.base] : Expr(0);
          break;
        case FormFactor::Type::Contact:
          pairing = u.vertical_at({f.field, f.alpha});
          break;
        case FormFactor::Type::Diff: {
          std::vector<Expr> terms{u.vertical_at({f.field, f.alpha})};
          for (int s = 0; s < bundle.n() && s < static_cast<int>(u.horizontal.size()); ++s)
            terms.push_back(u.horizontal[s] * bundle.coord(f.field, f.alpha + bundle.unit(s)));
          pairing = Expr::add(std::move(terms));
          break;
        }
      }
      if (pairing.is_zero()) continue;
      BigradedForm::Factors rest(factors.begin(), factors.begin() + j);
      rest.insert(rest.end(), factors.begin() + j + 1, factors.end());
      out.add_term(std::move(rest), c * pairing * Expr(j % 2 ? -1 : 1));
    }
  }
  return out;
}

BigradedForm pullback(const JetBundle& bundle, const BigradedForm& w, const std::map<int, Expr>& section) {
  BigradedForm out;
  BigradedForm h = horizontalize(bundle, w);
  for (const auto& [factors, c] : h.terms()) out.add_term(factors, pullback(bundle, c, section));
  return out;
}

std::string to_plain(const JetBundle& bundle, const BigradedForm& w) {
  if (w.is_zero()) return "0";
  std::string out;
  for (const auto& [factors, c] : w.terms()) {
    if (!out.empty()) out += " + ";
    std::string coeff = jetvar::to_plain(c);
    bool simple = c.is_symbol() || c.is_number() || c.kind() == Kind::Func || c.kind() == Kind::Opaque;
    if (factors.empty()) {
      out += coeff;
      continue;
    }
    if (c == Expr(-1)) {
      out += "-";
    } else if (!c.is_one()) {
      out += (simple ? coeff : "(" + coeff + ")") + "*";
    }
    for (std::size_t j = 0; j < factors.size(); ++j) {
      const FormFactor& f = factors[j];
      if (j) out += "^";
      switch (f.type) {
        case FormFactor::Type::Base: out += "d" + bundle.base_name(f.base); break;
        case FormFactor::Type::Contact: out += "theta(" + bundle.coord_name(f.field, f.alpha) + ")"; break;
        case FormFactor::Type::Diff: out += "d(" + bundle.coord_name(f.field, f.alpha) + ")"; break;
      }
    }
  }
  return out;
}

}  // namespace jetvar
