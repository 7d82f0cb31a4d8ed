#include "pmguard/field.hpp"

#include <string>
#include <utility>

#include "pmguard/error.hpp"
#include "pmguard/random.hpp"

namespace pmguard {

Symbol::Symbol(std::initializer_list<std::uint64_t> values) {
  components_.reserve(values.size());
  for (auto v : values) {
    components_.push_back(Element{v});
  }
}

bool Symbol::is_zero() const noexcept {
  for (const auto& c : components_) {
    if (c.value != 0) {
      return false;
    }
  }
  return true;
}

Matrix::Matrix(std::initializer_list<std::initializer_list<std::uint64_t>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw Error(ErrorCode::InvalidArgument, "ragged matrix literal");
    }
    for (auto v : r) {
      data_.push_back(Element{v});
    }
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m.at(i, i) = Element{1};
  }
  return m;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) {
    return false;
  }
  if (n % 2 == 0) {
    return n == 2;
  }
  for (std::uint64_t d = 3; d * d <= n; d += 2) {
    if (n % d == 0) {
      return false;
    }
  }
  return true;
}

PrimeField::PrimeField(std::uint64_t q) : q_(q) {
  if (q >= (std::uint64_t{1} << 32) || !is_prime(q)) {
    throw Error(ErrorCode::InvalidParams, "field modulus " + std::to_string(q) + " is not a prime below 2^32");
  }
}

Element PrimeField::element(std::int64_t x) const noexcept {
  const auto q = static_cast<std::int64_t>(q_);
  std::int64_t r = x % q;
  if (r < 0) {
    r += q;
  }
  return Element{static_cast<std::uint64_t>(r)};
}

Element PrimeField::add(Element a, Element b) const noexcept {
  const std::uint64_t s = a.value + b.value;
  return Element{s >= q_ ? s - q_ : s};
}

Element PrimeField::sub(Element a, Element b) const noexcept {
  return Element{a.value >= b.value ? a.value - b.value : a.value + q_ - b.value};
}

Element PrimeField::neg(Element a) const noexcept { return Element{a.value == 0 ? 0 : q_ - a.value}; }

Element PrimeField::mul(Element a, Element b) const noexcept { return Element{(a.value * b.value) % q_}; }

Element PrimeField::pow(Element a, std::uint64_t e) const noexcept {
  Element result{1 % q_};
  while (e > 0) {
    if (e & 1) {
      result = mul(result, a);
    }
    a = mul(a, a);
    e >>= 1;
  }
  return result;
}

Element PrimeField::inv(Element a) const {
  if (a.value == 0) {
    throw Error(ErrorCode::ZeroInverse, "zero has no multiplicative inverse");
  }
  // Extended Euclid on (a, q).
  std::int64_t t = 0;
  std::int64_t new_t = 1;
  auto r = static_cast<std::int64_t>(q_);
  auto new_r = static_cast<std::int64_t>(a.value);
  while (new_r != 0) {
    const std::int64_t quotient = r / new_r;
    t = std::exchange(new_t, t - quotient * new_t);
    r = std::exchange(new_r, r - quotient * new_r);
  }
  return element(t);
}

namespace {

void require_same_length(const Symbol& x, const Symbol& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch,
                "symbol lengths differ: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
}

}  // namespace

Symbol PrimeField::add(const Symbol& x, const Symbol& y) const {
  require_same_length(x, y);
  Symbol out(x.size());
  for (std::size_t s = 0; s < x.size(); ++s) {
    out[s] = add(x[s], y[s]);
  }
  return out;
}

Symbol PrimeField::sub(const Symbol& x, const Symbol& y) const {
  require_same_length(x, y);
  Symbol out(x.size());
  for (std::size_t s = 0; s < x.size(); ++s) {
    out[s] = sub(x[s], y[s]);
  }
  return out;
}

Symbol PrimeField::scale(Element a, const Symbol& x) const {
  Symbol out(x.size());
  for (std::size_t s = 0; s < x.size(); ++s) {
    out[s] = mul(a, x[s]);
  }
  return out;
}

void PrimeField::axpy(Element a, const Symbol& x, Symbol& acc) const {
  require_same_length(x, acc);
  if (a.value == 0) {
    return;
  }
  for (std::size_t s = 0; s < x.size(); ++s) {
    acc[s] = Element{(acc[s].value + a.value * x[s].value) % q_};
  }
}

Element PrimeField::dot(const Symbol& x, const Symbol& y) const {
  require_same_length(x, y);
  return dot(x.components(), y.components());
}

Element PrimeField::dot(std::span<const Element> x, std::span<const Element> y) const {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "vector lengths differ");
  }
  std::uint64_t acc = 0;
  for (std::size_t s = 0; s < x.size(); ++s) {
    acc = (acc + x[s].value * y[s].value) % q_;
  }
  return Element{acc};
}

Symbol PrimeField::combine(std::span<const Element> coeffs, std::span<const Symbol> symbols) const {
  if (coeffs.size() != symbols.size() || symbols.empty()) {
    throw Error(ErrorCode::LengthMismatch, "combine needs one coefficient per symbol");
  }
  Symbol acc(symbols.front().size());
  for (std::size_t j = 0; j < symbols.size(); ++j) {
    axpy(coeffs[j], symbols[j], acc);
  }
  return acc;
}

Matrix PrimeField::multiply(const Matrix& a, const Matrix& b) const {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::LengthMismatch, "matrix dimensions do not agree");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      std::uint64_t acc = 0;
      for (std::size_t t = 0; t < a.cols(); ++t) {
        acc = (acc + a.at(i, t).value * b.at(t, j).value) % q_;
      }
      out.at(i, j) = Element{acc};
    }
  }
  return out;
}

SymbolMatrix PrimeField::multiply(const Matrix& a, const SymbolMatrix& x) const {
  if (a.cols() != x.rows()) {
    throw Error(ErrorCode::LengthMismatch, "matrix dimensions do not agree");
  }
  SymbolMatrix out(a.rows(), x.cols(), x.symbol_length());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      for (std::size_t t = 0; t < a.cols(); ++t) {
        axpy(a.at(i, t), x.at(t, j), out.at(i, j));
      }
    }
  }
  return out;
}

Matrix PrimeField::transpose(const Matrix& a) const {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out.at(j, i) = a.at(i, j);
    }
  }
  return out;
}

SymbolMatrix PrimeField::solve(const Matrix& a, const SymbolMatrix& y) const {
  const std::size_t m = a.rows();
  if (a.cols() != m) {
    throw Error(ErrorCode::InvalidArgument, "solve needs a square matrix");
  }
  if (y.rows() != m) {
    throw Error(ErrorCode::LengthMismatch, "right-hand side has " + std::to_string(y.rows()) + " rows, expected " +
                                               std::to_string(m));
  }
  Matrix lhs = a;
  SymbolMatrix rhs = y;
  // Gauss-Jordan with first-nonzero pivoting; the row operations are applied
  // to every right-hand side column at once.
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    while (pivot < m && lhs.at(pivot, col).value == 0) {
      ++pivot;
    }
    if (pivot == m) {
      throw Error(ErrorCode::SingularMatrix, "matrix is singular");
    }
    if (pivot != col) {
      for (std::size_t c = 0; c < m; ++c) {
        std::swap(lhs.at(pivot, c), lhs.at(col, c));
      }
      for (std::size_t c = 0; c < rhs.cols(); ++c) {
        std::swap(rhs.at(pivot, c), rhs.at(col, c));
      }
    }
    const Element scale_by = inv(lhs.at(col, col));
    for (std::size_t c = 0; c < m; ++c) {
      lhs.at(col, c) = mul(lhs.at(col, c), scale_by);
    }
    for (std::size_t c = 0; c < rhs.cols(); ++c) {
      rhs.at(col, c) = scale(scale_by, rhs.at(col, c));
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col || lhs.at(r, col).value == 0) {
        continue;
      }
      const Element factor = neg(lhs.at(r, col));
      for (std::size_t c = 0; c < m; ++c) {
        lhs.at(r, c) = add(lhs.at(r, c), mul(factor, lhs.at(col, c)));
      }
      for (std::size_t c = 0; c < rhs.cols(); ++c) {
        axpy(factor, rhs.at(col, c), rhs.at(r, c));
      }
    }
  }
  return rhs;
}

std::vector<Symbol> PrimeField::solve(const Matrix& a, std::span<const Symbol> y) const {
  if (y.empty()) {
    if (a.rows() != 0) {
      throw Error(ErrorCode::LengthMismatch, "right-hand side is empty");
    }
    return {};
  }
  SymbolMatrix column(y.size(), 1, y.front().size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    require_same_length(y.front(), y[i]);
    column.at(i, 0) = y[i];
  }
  SymbolMatrix solved = solve(a, column);
  std::vector<Symbol> out;
  out.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    out.push_back(std::move(solved.at(i, 0)));
  }
  return out;
}

Matrix PrimeField::inverse(const Matrix& a) const {
  const std::size_t m = a.rows();
  SymbolMatrix id(m, m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    id.at(i, i)[0] = Element{1};
  }
  SymbolMatrix solved = solve(a, id);
  Matrix out(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      out.at(i, j) = solved.at(i, j)[0];
    }
  }
  return out;
}

namespace {

// Reduces a in place to reduced row echelon form; returns the pivot columns.
std::vector<std::size_t> row_reduce(const PrimeField& f, Matrix& a) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < a.cols() && row < a.rows(); ++col) {
    std::size_t p = row;
    while (p < a.rows() && a.at(p, col).value == 0) {
      ++p;
    }
    if (p == a.rows()) {
      continue;
    }
    for (std::size_t c = 0; c < a.cols(); ++c) {
      std::swap(a.at(p, c), a.at(row, c));
    }
    const Element s = f.inv(a.at(row, col));
    for (std::size_t c = 0; c < a.cols(); ++c) {
      a.at(row, c) = f.mul(a.at(row, c), s);
    }
    for (std::size_t r = 0; r < a.rows(); ++r) {
      if (r == row || a.at(r, col).value == 0) {
        continue;
      }
      const Element factor = f.neg(a.at(r, col));
      for (std::size_t c = 0; c < a.cols(); ++c) {
        a.at(r, c) = f.add(a.at(r, c), f.mul(factor, a.at(row, c)));
      }
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

}  // namespace

std::size_t PrimeField::rank(Matrix a) const { return row_reduce(*this, a).size(); }

std::vector<Symbol> PrimeField::null_space(Matrix a) const {
  const std::vector<std::size_t> pivots = row_reduce(*this, a);
  std::vector<bool> is_pivot(a.cols(), false);
  for (auto c : pivots) {
    is_pivot[c] = true;
  }
  std::vector<Symbol> basis;
  for (std::size_t free = 0; free < a.cols(); ++free) {
    if (is_pivot[free]) {
      continue;
    }
    Symbol e(a.cols());
    e[free] = Element{1};
    for (std::size_t r = 0; r < pivots.size(); ++r) {
      e[pivots[r]] = neg(a.at(r, free));
    }
    basis.push_back(std::move(e));
  }
  return basis;
}

Element PrimeField::random_element(Rng& rng) const { return Element{rng.below(q_)}; }

Element PrimeField::random_nonzero(Rng& rng) const { return Element{1 + rng.below(q_ - 1)}; }

Symbol PrimeField::random_symbol(std::size_t length, Rng& rng) const {
  Symbol out(length);
  for (auto& c : out) {
    c = random_element(rng);
  }
  return out;
}

Symbol PrimeField::random_nonzero_symbol(std::size_t length, Rng& rng) const {
  if (length == 0) {
    throw Error(ErrorCode::InvalidArgument, "a zero-length symbol cannot be nonzero");
  }
  for (;;) {
    Symbol s = random_symbol(length, rng);
    if (!s.is_zero()) {
      return s;
    }
  }
}

}  // namespace pmguard
