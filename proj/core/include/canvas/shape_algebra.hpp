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

// Symbolic tensor dimensions.
//
// A dimension is a reduced fraction of products of named constants
// (C, G, H, KH, KW, W), positive integer literals and dynamic variables
// x<k>. `Monomial` is the unrestricted algebra; `Dimension` wraps a monomial
// that obeys the per-dimension legality rules (no dynamic variable in the
// denominator, at most one in the numerator).
//
// Divisibility convention: G divides C. For factoring and integrality
// checks C is therefore treated as the product G * (C/G), with C/G an
// independent prime-like atom. No other divisibility between constants is
// assumed, so `C/G` is integral while `C/KH` or `C/(G*G)` is not.

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace canvas {

// Declared in alphabetical order of the rendered names; rendering sorts
// constants by this enum.
enum class Constant : std::uint8_t { kC, kG, kH, kKH, kKW, kW };
inline constexpr std::size_t kNumConstants = 6;
inline constexpr std::array<Constant, kNumConstants> kAllConstants = {
    Constant::kC, Constant::kG, Constant::kH,
    Constant::kKH, Constant::kKW, Constant::kW};

std::string_view constant_name(Constant c);
std::optional<Constant> parse_constant(std::string_view name);

struct VariableId {
  std::uint32_t value = 0;
  friend auto operator<=>(const VariableId&, const VariableId&) = default;
};

std::string variable_name(VariableId id);

struct Atom {
  enum class Kind : std::uint8_t { kIntLiteral, kDynVar, kConstant };

  Kind kind = Kind::kIntLiteral;
  Constant constant = Constant::kC;
  std::uint64_t literal = 1;
  VariableId var{};

  static Atom of(Constant c) { return {Kind::kConstant, c, 1, {}}; }
  static Atom of(VariableId v) { return {Kind::kDynVar, Constant::kC, 1, v}; }
  static Atom integer(std::uint64_t n) { return {Kind::kIntLiteral, Constant::kC, n, {}}; }

  friend bool operator==(const Atom&, const Atom&) = default;
};

class Monomial {
 public:
  Monomial() = default;

  static Monomial of(Constant c);
  static Monomial of(VariableId v);
  static Monomial integer(std::int64_t n);

  friend Monomial operator*(const Monomial& a, const Monomial& b);
  friend Monomial operator/(const Monomial& a, const Monomial& b);

  int exponent(Constant c) const { return consts_[static_cast<std::size_t>(c)]; }
  int exponent(VariableId v) const;
  const std::vector<std::pair<VariableId, int>>& variables() const { return vars_; }
  std::int64_t coefficient_numerator() const { return num_; }
  std::int64_t coefficient_denominator() const { return den_; }

  bool is_one() const;

  // Positive and negative parts in the plain atom basis.
  Monomial numerator() const;
  Monomial denominator() const;

  // Positive and negative parts in the divisibility basis (C = G * C/G).
  // numerator() / denominator() and the divisibility split agree as values.
  Monomial divisibility_numerator() const;
  Monomial divisibility_denominator() const;

  // True when the divisibility denominator is 1.
  bool divides_evenly() const;

  Monomial substitute(VariableId id, const Monomial& expr) const;

  std::string render() const;
  std::size_t hash() const;

  friend bool operator==(const Monomial&, const Monomial&) = default;
  friend std::strong_ordering operator<=>(const Monomial& a, const Monomial& b);

 private:
  void normalize();

  std::int64_t num_ = 1;
  std::int64_t den_ = 1;
  std::array<int, kNumConstants> consts_{};
  std::vector<std::pair<VariableId, int>> vars_;  // sorted by id, nonzero
};

class Dimension {
 public:
  Dimension() = default;  // the unit dimension "1"

  // Throws Error(kDynVarInDenominator) or Error(kTooManyDynVars).
  explicit Dimension(Monomial m);

  static Dimension of(Constant c) { return Dimension(Monomial::of(c)); }
  static Dimension of(VariableId v) { return Dimension(Monomial::of(v)); }
  static Dimension integer(std::int64_t n) { return Dimension(Monomial::integer(n)); }
  static Dimension from_atoms(std::span<const Atom> numerator,
                              std::span<const Atom> denominator);

  const Monomial& monomial() const { return m_; }
  std::optional<VariableId> variable() const;
  bool has_variable() const { return !m_.variables().empty(); }
  bool is_one() const { return m_.is_one(); }

  // Integral under every legal assignment without constraining a variable.
  bool guaranteed_integral() const { return !has_variable() && m_.divides_evenly(); }

  std::vector<Atom> numerator_atoms() const;
  std::vector<Atom> denominator_atoms() const;

  std::string render() const { return m_.render(); }
  std::size_t hash() const { return m_.hash(); }

  friend bool operator==(const Dimension&, const Dimension&) = default;
  friend std::strong_ordering operator<=>(const Dimension& a, const Dimension& b) {
    return a.m_ <=> b.m_;
  }

 private:
  Monomial m_;
};

Dimension multiply(const Dimension& a, const Dimension& b);
Dimension divide(const Dimension& a, const Dimension& b);

// Throws Error(kIllegalSubstitution) when the result is not a legal dimension.
Dimension substitute(const Dimension& d, VariableId id, const Dimension& expr);

// All symbolic divisors of `d`. Constants are prime-like except C, which
// splits as G * (C/G); integer literals are factored numerically. Requires
// an empty divisibility denominator. The result is sorted and unique.
std::vector<Dimension> enumerate_factors(const Dimension& d);

// Parses the canonical rendering, e.g. "C/G", "x2*KW", "C*KH/(G*G)", "1".
Dimension parse_dimension(std::string_view text);

enum class Region : std::uint8_t { kChannel, kSpatial };

struct Shape {
  std::vector<Dimension> channel;
  std::vector<Dimension> spatial;

  // <C | H, W>
  static Shape input();

  std::size_t rank() const { return channel.size() + spatial.size(); }
  const Dimension& flat(std::size_t i) const;
  Region region(std::size_t i) const {
    return i < channel.size() ? Region::kChannel : Region::kSpatial;
  }
  std::vector<VariableId> variables() const;

  // "[C,KH|H,W]"
  std::string render() const;
  std::size_t hash() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

Shape parse_shape(std::string_view text);
Shape substitute(const Shape& s, VariableId id, const Dimension& expr);

enum class Theorem1Rule : std::uint8_t {
  kDynVarInSpatial,
  kDynVarInDenominator,
  kMultipleDynVarsInNumerator,
  kMultipleDynVars,
};

struct Theorem1Violation {
  Theorem1Rule rule;
  std::size_t dim;  // flat index; for kMultipleDynVars the first offending dim

  std::string_view name() const;
  friend bool operator==(const Theorem1Violation&, const Theorem1Violation&) = default;
};

// Empty result means the shape is legal.
std::vector<Theorem1Violation> validate_theorem1(const Shape& s);

// Flat indices of variable-free dimensions that are not integral under the
// divisibility convention (e.g. KH/G).
std::vector<std::size_t> non_integral_dims(const Shape& s);

struct Assignment {
  std::map<Constant, std::int64_t> constants;
  std::map<VariableId, std::int64_t> dynvars;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

// Exact evaluation. Throws Error(kUnbound) or Error(kNonIntegral).
std::int64_t eval(const Dimension& d, const Assignment& a);
std::vector<std::int64_t> eval(const Shape& s, const Assignment& a);

// "C=4,G=2,H=6,KH=3,KW=3,W=6,x1=12"
std::string render(const Assignment& a);
Assignment parse_assignment(std::string_view text);

}  // namespace canvas

template <>
struct std::hash<canvas::Dimension> {
  std::size_t operator()(const canvas::Dimension& d) const noexcept { return d.hash(); }
};

template <>
struct std::hash<canvas::Shape> {
  std::size_t operator()(const canvas::Shape& s) const noexcept { return s.hash(); }
};
