#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace pmguard {

class Rng;

// Residue in [0, q). The modulus lives in the PrimeField that produced it.
struct Element {
  std::uint64_t value = 0;

  friend auto operator<=>(const Element&, const Element&) = default;
};

// A packet of v field elements. Addition and scaling are componentwise.
class Symbol {
 public:
  Symbol() = default;
  explicit Symbol(std::size_t length) : components_(length) {}
  Symbol(std::initializer_list<std::uint64_t> values);
  explicit Symbol(std::vector<Element> components) : components_(std::move(components)) {}

  static Symbol zero(std::size_t length) { return Symbol(length); }

  std::size_t size() const noexcept { return components_.size(); }
  bool is_zero() const noexcept;

  Element& operator[](std::size_t i) { return components_[i]; }
  const Element& operator[](std::size_t i) const { return components_[i]; }

  auto begin() noexcept { return components_.begin(); }
  auto end() noexcept { return components_.end(); }
  auto begin() const noexcept { return components_.begin(); }
  auto end() const noexcept { return components_.end(); }

  std::span<const Element> components() const noexcept { return components_; }

  friend bool operator==(const Symbol&, const Symbol&) = default;

 private:
  std::vector<Element> components_;
};

// Dense row-major matrix of scalars.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  Matrix(std::initializer_list<std::initializer_list<std::uint64_t>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Element& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Element& at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const Element> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<Element> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Element> data_;
};

// Dense row-major matrix whose entries are symbols of a common length.
class SymbolMatrix {
 public:
  SymbolMatrix() = default;
  SymbolMatrix(std::size_t rows, std::size_t cols, std::size_t symbol_length)
      : rows_(rows), cols_(cols), symbol_length_(symbol_length), data_(rows * cols, Symbol(symbol_length)) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t symbol_length() const noexcept { return symbol_length_; }

  Symbol& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Symbol& at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  friend bool operator==(const SymbolMatrix&, const SymbolMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t symbol_length_ = 0;
  std::vector<Symbol> data_;
};

bool is_prime(std::uint64_t n);

/// Arithmetic over the prime field F_q together with the linear algebra the
/// codec needs. All results are least nonnegative residues.
///
/// Moduli are limited to q < 2^32 so that products fit in 64 bits.
class PrimeField {
 public:
  /// Throws InvalidParams unless q is a prime below 2^32.
  explicit PrimeField(std::uint64_t q);

  std::uint64_t modulus() const noexcept { return q_; }

  Element element(std::int64_t x) const noexcept;

  Element add(Element a, Element b) const noexcept;
  Element sub(Element a, Element b) const noexcept;
  Element neg(Element a) const noexcept;
  Element mul(Element a, Element b) const noexcept;
  Element pow(Element a, std::uint64_t e) const noexcept;
  /// Throws ZeroInverse for a = 0.
  Element inv(Element a) const;

  Symbol add(const Symbol& x, const Symbol& y) const;
  Symbol sub(const Symbol& x, const Symbol& y) const;
  Symbol scale(Element a, const Symbol& x) const;
  /// acc += a * x
  void axpy(Element a, const Symbol& x, Symbol& acc) const;
  /// Sum_s x_s * y_s. Throws LengthMismatch when the lengths differ.
  Element dot(const Symbol& x, const Symbol& y) const;
  Element dot(std::span<const Element> x, std::span<const Element> y) const;

  /// Sum_j coeffs[j] * symbols[j].
  Symbol combine(std::span<const Element> coeffs, std::span<const Symbol> symbols) const;

  Matrix multiply(const Matrix& a, const Matrix& b) const;
  SymbolMatrix multiply(const Matrix& a, const SymbolMatrix& x) const;
  Matrix transpose(const Matrix& a) const;

  /// Solves a * z = y for square a, one right-hand side symbol per row, each
  /// coordinate independently. Throws SingularMatrix when rank(a) < rows.
  std::vector<Symbol> solve(const Matrix& a, std::span<const Symbol> y) const;
  SymbolMatrix solve(const Matrix& a, const SymbolMatrix& y) const;

  Matrix inverse(const Matrix& a) const;
  std::size_t rank(Matrix a) const;
  /// Basis of { e : a * e = 0 }.
  std::vector<Symbol> null_space(Matrix a) const;

  Element random_element(Rng& rng) const;
  Element random_nonzero(Rng& rng) const;
  Symbol random_symbol(std::size_t length, Rng& rng) const;
  Symbol random_nonzero_symbol(std::size_t length, Rng& rng) const;

 private:
  std::uint64_t q_;
};

}  // namespace pmguard
