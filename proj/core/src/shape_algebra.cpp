// Copyright 2026 The Canvas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "canvas/shape_algebra.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <numeric>
#include <set>

#include "canvas/error.hpp"

namespace canvas {

namespace {

constexpr std::size_t kIdxC = static_cast<std::size_t>(Constant::kC);
constexpr std::size_t kIdxG = static_cast<std::size_t>(Constant::kG);

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw Error(ErrorCode::kInvalidArgument, "integer overflow in dimension arithmetic");
  }
  return r;
}

std::size_t mix(std::size_t seed, std::size_t v) {
  // boost::hash_combine with a 64-bit golden ratio constant.
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, "expected integer, got '" + std::string(s) + "'");
  }
  return v;
}

Monomial parse_term(std::string_view t) {
  t = trim(t);
  if (t.empty()) throw Error(ErrorCode::kParse, "empty term in dimension");
  if (t.front() >= '0' && t.front() <= '9') {
    auto n = parse_int(t);
    if (n < 1) throw Error(ErrorCode::kParse, "integer literal must be >= 1");
    return Monomial::integer(n);
  }
  if (t.front() == 'x') {
    auto id = parse_int(t.substr(1));
    if (id < 0) throw Error(ErrorCode::kParse, "bad variable id");
    return Monomial::of(VariableId{static_cast<std::uint32_t>(id)});
  }
  if (auto c = parse_constant(t)) return Monomial::of(*c);
  throw Error(ErrorCode::kParse, "unknown atom '" + std::string(t) + "'");
}

Monomial parse_product(std::string_view text) {
  Monomial m;
  std::size_t start = 0;
  while (true) {
    auto star = text.find('*', start);
    m = m * parse_term(text.substr(start, star == std::string_view::npos ? text.npos : star - start));
    if (star == std::string_view::npos) break;
    start = star + 1;
  }
  return m;
}

std::vector<std::pair<std::int64_t, int>> prime_factors(std::int64_t n) {
  std::vector<std::pair<std::int64_t, int>> out;
  for (std::int64_t p = 2; p * p <= n; ++p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e > 0) out.emplace_back(p, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

}  // namespace

std::string_view constant_name(Constant c) {
  switch (c) {
    case Constant::kC: return "C";
    case Constant::kG: return "G";
    case Constant::kH: return "H";
    case Constant::kKH: return "KH";
    case Constant::kKW: return "KW";
    case Constant::kW: return "W";
  }
  return "?";
}

std::optional<Constant> parse_constant(std::string_view name) {
  for (auto c : kAllConstants) {
    if (constant_name(c) == name) return c;
  }
  if (name == "K_H") return Constant::kKH;
  if (name == "K_W") return Constant::kKW;
  return std::nullopt;
}

std::string variable_name(VariableId id) { return "x" + std::to_string(id.value); }

// ---------------------------------------------------------------------------
// Monomial

Monomial Monomial::of(Constant c) {
  Monomial m;
  m.consts_[static_cast<std::size_t>(c)] = 1;
  return m;
}

Monomial Monomial::of(VariableId v) {
  Monomial m;
  m.vars_.emplace_back(v, 1);
  return m;
}

Monomial Monomial::integer(std::int64_t n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "integer literal must be >= 1");
  Monomial m;
  m.num_ = n;
  return m;
}

int Monomial::exponent(VariableId v) const {
  for (const auto& [id, e] : vars_) {
    if (id == v) return e;
  }
  return 0;
}

bool Monomial::is_one() const {
  return num_ == 1 && den_ == 1 && vars_.empty() &&
         std::all_of(consts_.begin(), consts_.end(), [](int e) { return e == 0; });
}

void Monomial::normalize() {
  auto g = std::gcd(num_, den_);
  num_ /= g;
  den_ /= g;
  std::erase_if(vars_, [](const auto& p) { return p.second == 0; });
}

Monomial operator*(const Monomial& a, const Monomial& b) {
  Monomial r;
  r.num_ = checked_mul(a.num_, b.num_);
  r.den_ = checked_mul(a.den_, b.den_);
  for (std::size_t i = 0; i < kNumConstants; ++i) r.consts_[i] = a.consts_[i] + b.consts_[i];
  r.vars_.reserve(a.vars_.size() + b.vars_.size());
  std::size_t i = 0, j = 0;
  while (i < a.vars_.size() || j < b.vars_.size()) {
    if (j == b.vars_.size() || (i < a.vars_.size() && a.vars_[i].first < b.vars_[j].first)) {
      r.vars_.push_back(a.vars_[i++]);
    } else if (i == a.vars_.size() || b.vars_[j].first < a.vars_[i].first) {
      r.vars_.push_back(b.vars_[j++]);
    } else {
      r.vars_.emplace_back(a.vars_[i].first, a.vars_[i].second + b.vars_[j].second);
      ++i;
      ++j;
    }
  }
  r.normalize();
  return r;
}

Monomial operator/(const Monomial& a, const Monomial& b) {
  Monomial inv;
  inv.num_ = b.den_;
  inv.den_ = b.num_;
  for (std::size_t i = 0; i < kNumConstants; ++i) inv.consts_[i] = -b.consts_[i];
  inv.vars_.reserve(b.vars_.size());
  for (const auto& [id, e] : b.vars_) inv.vars_.emplace_back(id, -e);
  return a * inv;
}

Monomial Monomial::numerator() const {
  Monomial r;
  r.num_ = num_;
  for (std::size_t i = 0; i < kNumConstants; ++i) r.consts_[i] = std::max(consts_[i], 0);
  for (const auto& [id, e] : vars_) {
    if (e > 0) r.vars_.emplace_back(id, e);
  }
  return r;
}

Monomial Monomial::denominator() const {
  Monomial r;
  r.num_ = den_;
  for (std::size_t i = 0; i < kNumConstants; ++i) r.consts_[i] = std::max(-consts_[i], 0);
  for (const auto& [id, e] : vars_) {
    if (e < 0) r.vars_.emplace_back(id, -e);
  }
  return r;
}

Monomial Monomial::divisibility_numerator() const {
  Monomial r = numerator();
  // C/G exponent q = e_C, G exponent g = e_G + e_C.
  const int q = std::max(consts_[kIdxC], 0);
  const int g = std::max(consts_[kIdxG] + consts_[kIdxC], 0);
  r.consts_[kIdxC] = q;
  r.consts_[kIdxG] = g - q;
  return r;
}

Monomial Monomial::divisibility_denominator() const {
  Monomial r = denominator();
  const int q = std::max(-consts_[kIdxC], 0);
  const int g = std::max(-(consts_[kIdxG] + consts_[kIdxC]), 0);
  r.consts_[kIdxC] = q;
  r.consts_[kIdxG] = g - q;
  return r;
}

bool Monomial::divides_evenly() const {
  if (den_ != 1) return false;
  if (consts_[kIdxC] < 0 || consts_[kIdxG] + consts_[kIdxC] < 0) return false;
  for (std::size_t i = 0; i < kNumConstants; ++i) {
    if (i != kIdxC && i != kIdxG && consts_[i] < 0) return false;
  }
  return std::all_of(vars_.begin(), vars_.end(), [](const auto& p) { return p.second > 0; });
}

Monomial Monomial::substitute(VariableId id, const Monomial& expr) const {
  const int e = exponent(id);
  if (e == 0) return *this;
  Monomial rest = *this;
  std::erase_if(rest.vars_, [&](const auto& p) { return p.first == id; });
  for (int k = 0; k < e; ++k) rest = rest * expr;
  for (int k = 0; k > e; --k) rest = rest / expr;
  return rest;
}

std::string Monomial::render() const {
  auto terms = [&](bool positive) {
    std::vector<std::string> out;
    const std::int64_t coef = positive ? num_ : den_;
    if (coef != 1) out.push_back(std::to_string(coef));
    for (const auto& [id, e] : vars_) {
      const int n = positive ? e : -e;
      for (int k = 0; k < n; ++k) out.push_back(variable_name(id));
    }
    for (auto c : kAllConstants) {
      const int e = consts_[static_cast<std::size_t>(c)];
      const int n = positive ? e : -e;
      for (int k = 0; k < n; ++k) out.emplace_back(constant_name(c));
    }
    return out;
  };
  auto join = [](const std::vector<std::string>& parts) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) s += '*';
      s += parts[i];
    }
    return s;
  };
  auto num = terms(true);
  auto den = terms(false);
  std::string s = num.empty() ? "1" : join(num);
  if (!den.empty()) {
    s += '/';
    s += den.size() == 1 ? den.front() : "(" + join(den) + ")";
  }
  return s;
}

std::size_t Monomial::hash() const {
  std::size_t h = std::hash<std::int64_t>{}(num_);
  h = mix(h, std::hash<std::int64_t>{}(den_));
  for (int e : consts_) h = mix(h, static_cast<std::size_t>(e + 1000));
  for (const auto& [id, e] : vars_) {
    h = mix(h, id.value);
    h = mix(h, static_cast<std::size_t>(e + 1000));
  }
  return h;
}

std::strong_ordering operator<=>(const Monomial& a, const Monomial& b) {
  if (auto c = a.num_ <=> b.num_; c != 0) return c;
  if (auto c = a.den_ <=> b.den_; c != 0) return c;
  if (auto c = a.consts_ <=> b.consts_; c != 0) return c;
  return a.vars_ <=> b.vars_;
}

// ---------------------------------------------------------------------------
// Dimension

Dimension::Dimension(Monomial m) : m_(std::move(m)) {
  int numerator_vars = 0;
  for (const auto& [id, e] : m_.variables()) {
    if (e < 0) {
      throw Error(ErrorCode::kDynVarInDenominator,
                  "dynamic variable " + variable_name(id) + " in denominator of " + m_.render());
    }
    numerator_vars += e;
  }
  if (numerator_vars > 1) {
    throw Error(ErrorCode::kTooManyDynVars,
                "more than one dynamic variable in numerator of " + m_.render());
  }
}

Dimension Dimension::from_atoms(std::span<const Atom> numerator,
                                std::span<const Atom> denominator) {
  auto product = [](std::span<const Atom> atoms) {
    Monomial m;
    for (const auto& a : atoms) {
      switch (a.kind) {
        case Atom::Kind::kConstant: m = m * Monomial::of(a.constant); break;
        case Atom::Kind::kDynVar: m = m * Monomial::of(a.var); break;
        case Atom::Kind::kIntLiteral:
          m = m * Monomial::integer(static_cast<std::int64_t>(a.literal));
          break;
      }
    }
    return m;
  };
  return Dimension(product(numerator) / product(denominator));
}

std::optional<VariableId> Dimension::variable() const {
  if (m_.variables().empty()) return std::nullopt;
  return m_.variables().front().first;
}

namespace {

std::vector<Atom> atoms_of(const Monomial& part) {
  std::vector<Atom> out;
  if (part.coefficient_numerator() != 1) {
    out.push_back(Atom::integer(static_cast<std::uint64_t>(part.coefficient_numerator())));
  }
  for (const auto& [id, e] : part.variables()) {
    for (int k = 0; k < e; ++k) out.push_back(Atom::of(id));
  }
  for (auto c : kAllConstants) {
    for (int k = 0; k < part.exponent(c); ++k) out.push_back(Atom::of(c));
  }
  return out;
}

}  // namespace

std::vector<Atom> Dimension::numerator_atoms() const { return atoms_of(m_.numerator()); }
std::vector<Atom> Dimension::denominator_atoms() const { return atoms_of(m_.denominator()); }

Dimension multiply(const Dimension& a, const Dimension& b) {
  return Dimension(a.monomial() * b.monomial());
}

Dimension divide(const Dimension& a, const Dimension& b) {
  return Dimension(a.monomial() / b.monomial());
}

Dimension substitute(const Dimension& d, VariableId id, const Dimension& expr) {
  try {
    return Dimension(d.monomial().substitute(id, expr.monomial()));
  } catch (const Error& e) {
    throw Error(ErrorCode::kIllegalSubstitution,
                variable_name(id) + " := " + expr.render() + " in " + d.render() + ": " + e.what());
  }
}

std::vector<Dimension> enumerate_factors(const Dimension& d) {
  const Monomial& m = d.monomial();
  if (!m.divides_evenly()) {
    throw Error(ErrorCode::kInvalidArgument,
                "enumerate_factors requires an empty denominator, got " + d.render());
  }
  // (base, max exponent) pairs over the divisibility basis.
  std::vector<std::pair<Monomial, int>> basis;
  const int q = m.exponent(Constant::kC);
  const int g = m.exponent(Constant::kG) + q;
  if (q > 0) basis.emplace_back(Monomial::of(Constant::kC) / Monomial::of(Constant::kG), q);
  if (g > 0) basis.emplace_back(Monomial::of(Constant::kG), g);
  for (auto c : {Constant::kH, Constant::kKH, Constant::kKW, Constant::kW}) {
    if (m.exponent(c) > 0) basis.emplace_back(Monomial::of(c), m.exponent(c));
  }
  for (const auto& [id, e] : m.variables()) basis.emplace_back(Monomial::of(id), e);
  for (const auto& [p, e] : prime_factors(m.coefficient_numerator())) {
    basis.emplace_back(Monomial::integer(p), e);
  }

  std::vector<Monomial> acc = {Monomial{}};
  for (const auto& [base, max_e] : basis) {
    std::vector<Monomial> next;
    next.reserve(acc.size() * static_cast<std::size_t>(max_e + 1));
    for (const auto& f : acc) {
      Monomial power = f;
      next.push_back(power);
      for (int k = 1; k <= max_e; ++k) {
        power = power * base;
        next.push_back(power);
      }
    }
    acc = std::move(next);
  }
  std::vector<Dimension> out;
  out.reserve(acc.size());
  for (auto& f : acc) out.emplace_back(std::move(f));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Dimension parse_dimension(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw Error(ErrorCode::kParse, "empty dimension");
  auto slash = text.find('/');
  Monomial num = parse_product(text.substr(0, slash));
  Monomial den;
  if (slash != std::string_view::npos) {
    auto d = trim(text.substr(slash + 1));
    if (!d.empty() && d.front() == '(') {
      if (d.back() != ')') throw Error(ErrorCode::kParse, "unbalanced parentheses in " + std::string(text));
      d = d.substr(1, d.size() - 2);
    }
    den = parse_product(d);
  }
  return Dimension(num / den);
}

// ---------------------------------------------------------------------------
// Shape

Shape Shape::input() {
  return Shape{{Dimension::of(Constant::kC)},
               {Dimension::of(Constant::kH), Dimension::of(Constant::kW)}};
}

const Dimension& Shape::flat(std::size_t i) const {
  return i < channel.size() ? channel[i] : spatial[i - channel.size()];
}

std::vector<VariableId> Shape::variables() const {
  std::vector<VariableId> out;
  auto collect = [&](const std::vector<Dimension>& dims) {
    for (const auto& d : dims) {
      for (const auto& [id, e] : d.monomial().variables()) {
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
      }
    }
  };
  collect(channel);
  collect(spatial);
  std::sort(out.begin(), out.end());
  return out;
}

std::string Shape::render() const {
  std::string s = "[";
  for (std::size_t i = 0; i < channel.size(); ++i) {
    if (i) s += ',';
    s += channel[i].render();
  }
  s += '|';
  for (std::size_t i = 0; i < spatial.size(); ++i) {
    if (i) s += ',';
    s += spatial[i].render();
  }
  s += ']';
  return s;
}

std::size_t Shape::hash() const {
  std::size_t h = channel.size();
  for (const auto& d : channel) h = mix(h, d.hash());
  h = mix(h, 0x5bd1e995);
  for (const auto& d : spatial) h = mix(h, d.hash());
  return h;
}

Shape parse_shape(std::string_view text) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    throw Error(ErrorCode::kParse, "shape must be bracketed: '" + std::string(text) + "'");
  }
  text = text.substr(1, text.size() - 2);
  auto bar = text.find('|');
  if (bar == std::string_view::npos) {
    throw Error(ErrorCode::kParse, "shape needs a '|' region separator");
  }
  auto split = [](std::string_view part) {
    std::vector<Dimension> dims;
    part = trim(part);
    if (part.empty()) return dims;
    std::size_t start = 0;
    while (true) {
      auto comma = part.find(',', start);
      dims.push_back(parse_dimension(
          part.substr(start, comma == std::string_view::npos ? part.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return dims;
  };
  return Shape{split(text.substr(0, bar)), split(text.substr(bar + 1))};
}

Shape substitute(const Shape& s, VariableId id, const Dimension& expr) {
  Shape out;
  out.channel.reserve(s.channel.size());
  out.spatial.reserve(s.spatial.size());
  for (const auto& d : s.channel) out.channel.push_back(substitute(d, id, expr));
  for (const auto& d : s.spatial) out.spatial.push_back(substitute(d, id, expr));
  return out;
}

std::string_view Theorem1Violation::name() const {
  switch (rule) {
    case Theorem1Rule::kDynVarInSpatial: return "dynvar in spatial";
    case Theorem1Rule::kDynVarInDenominator: return "dynvar in denominator";
    case Theorem1Rule::kMultipleDynVarsInNumerator: return "multiple dynvars in numerator";
    case Theorem1Rule::kMultipleDynVars: return "multiple dynvars";
  }
  return "?";
}

std::vector<Theorem1Violation> validate_theorem1(const Shape& s) {
  std::vector<Theorem1Violation> out;
  std::optional<VariableId> seen;
  bool reported_multiple = false;
  for (std::size_t i = 0; i < s.rank(); ++i) {
    const auto& m = s.flat(i).monomial();
    int numerator_vars = 0;
    bool in_denominator = false;
    for (const auto& [id, e] : m.variables()) {
      if (e < 0) in_denominator = true;
      if (e > 0) numerator_vars += e;
      if (!seen) {
        seen = id;
      } else if (*seen != id && !reported_multiple) {
        out.push_back({Theorem1Rule::kMultipleDynVars, i});
        reported_multiple = true;
      }
    }
    if (!m.variables().empty() && s.region(i) == Region::kSpatial) {
      out.push_back({Theorem1Rule::kDynVarInSpatial, i});
    }
    if (in_denominator) out.push_back({Theorem1Rule::kDynVarInDenominator, i});
    if (numerator_vars > 1) out.push_back({Theorem1Rule::kMultipleDynVarsInNumerator, i});
  }
  return out;
}

std::vector<std::size_t> non_integral_dims(const Shape& s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.rank(); ++i) {
    const auto& d = s.flat(i);
    if (!d.has_variable() && !d.monomial().divides_evenly()) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

std::int64_t eval(const Dimension& d, const Assignment& a) {
  const Monomial& m = d.monomial();
  std::int64_t num = m.coefficient_numerator();
  std::int64_t den = m.coefficient_denominator();
  auto scale = [&](std::int64_t value, int e, const std::string& name) {
    if (value < 1) {
      throw Error(ErrorCode::kInvalidArgument, name + " must be a positive integer");
    }
    for (int k = 0; k < std::abs(e); ++k) {
      std::int64_t& acc = e > 0 ? num : den;
      if (__builtin_mul_overflow(acc, value, &acc)) {
        throw Error(ErrorCode::kInvalidArgument, "overflow evaluating " + d.render());
      }
    }
  };
  for (auto c : kAllConstants) {
    const int e = m.exponent(c);
    if (e == 0) continue;
    auto it = a.constants.find(c);
    if (it == a.constants.end()) {
      throw Error(ErrorCode::kUnbound, std::string(constant_name(c)) + " unbound in " + d.render());
    }
    scale(it->second, e, std::string(constant_name(c)));
  }
  for (const auto& [id, e] : m.variables()) {
    auto it = a.dynvars.find(id);
    if (it == a.dynvars.end()) {
      throw Error(ErrorCode::kUnbound, variable_name(id) + " unbound in " + d.render());
    }
    scale(it->second, e, variable_name(id));
  }
  if (num % den != 0) {
    throw Error(ErrorCode::kNonIntegral, d.render() + " is not integral under " + render(a));
  }
  return num / den;
}

std::vector<std::int64_t> eval(const Shape& s, const Assignment& a) {
  std::vector<std::int64_t> out;
  out.reserve(s.rank());
  for (std::size_t i = 0; i < s.rank(); ++i) out.push_back(eval(s.flat(i), a));
  return out;
}

std::string render(const Assignment& a) {
  std::string s;
  for (const auto& [c, v] : a.constants) {
    if (!s.empty()) s += ',';
    s += std::string(constant_name(c)) + "=" + std::to_string(v);
  }
  for (const auto& [id, v] : a.dynvars) {
    if (!s.empty()) s += ',';
    s += variable_name(id) + "=" + std::to_string(v);
  }
  return s;
}

Assignment parse_assignment(std::string_view text) {
  Assignment a;
  text = trim(text);
  if (text.empty()) return a;
  std::size_t start = 0;
  while (true) {
    auto comma = text.find(',', start);
    auto item = trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
    auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kParse, "assignment item needs '=': '" + std::string(item) + "'");
    }
    auto name = trim(item.substr(0, eq));
    auto value = parse_int(trim(item.substr(eq + 1)));
    if (value < 1) throw Error(ErrorCode::kParse, "assigned values must be positive");
    if (auto c = parse_constant(name)) {
      a.constants[*c] = value;
    } else if (!name.empty() && name.front() == 'x') {
      a.dynvars[VariableId{static_cast<std::uint32_t>(parse_int(name.substr(1)))}] = value;
    } else {
      throw Error(ErrorCode::kParse, "unknown name '" + std::string(name) + "'");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return a;
}

}  // namespace canvas
