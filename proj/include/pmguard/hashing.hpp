#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "pmguard/field.hpp"
#include "pmguard/pm_code.hpp"

namespace pmguard {

/// Unordered pair of distinct symbol ids, stored with first < second.
class SymbolPair {
 public:
  /// Throws SamePair when a == b.
  SymbolPair(SymbolId a, SymbolId b);

  const SymbolId& first() const noexcept { return first_; }
  const SymbolId& second() const noexcept { return second_; }

  friend auto operator<=>(const SymbolPair&, const SymbolPair&) = default;

 private:
  SymbolId first_;
  SymbolId second_;
};

/// Correlation hash of two distinct cross symbols: their F_q dot product.
Element correlation_hash(const PrimeField& field, const CrossSymbol& x, const CrossSymbol& y);

/// Hashes downloaded from the trusted server for one protocol run.
class TrustedHashes {
 public:
  TrustedHashes() = default;
  explicit TrustedHashes(std::map<SymbolPair, Element> entries) : entries_(std::move(entries)) {}

  /// Throws MissingHash when the pair was not fetched.
  Element lookup(SymbolId a, SymbolId b) const;
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<SymbolPair, Element>& entries() const noexcept { return entries_; }

 private:
  std::map<SymbolPair, Element> entries_;
};

struct HashStoreHeader {
  int n = 0;
  int k_prime = 0;
  int d_prime = 0;
  std::uint64_t q = 0;
  std::size_t v = 0;

  friend bool operator==(const HashStoreHeader&, const HashStoreHeader&) = default;
};

/// The trusted server: the correlation hash of every pair of distinct cross
/// symbols. Write-once; after populate() the store is sealed and read-only.
class HashStore {
 public:
  explicit HashStore(const SystemParams& params);
  explicit HashStore(const HashStoreHeader& header);

  /// Computes and seals all C(theta, 2) hashes. Throws StoreSealed on a
  /// second call and IncompleteSymbolSet if any of the C(n, 2) symbols is
  /// missing.
  void populate(const CrossSymbolSet& symbols);

  bool sealed() const noexcept { return sealed_; }
  const HashStoreHeader& header() const noexcept { return header_; }
  /// Number of cross symbols, C(n, 2).
  std::size_t theta() const noexcept { return theta_; }
  /// Number of stored hashes, C(theta, 2) once sealed.
  std::size_t size() const noexcept { return sealed_ ? values_.size() : 0; }

  /// Throws UnknownSymbolId for ids outside 1..n and SamePair for a == b.
  Element hash(SymbolId a, SymbolId b) const;

  /// All pairwise hashes among the requested ids (duplicates ignored).
  TrustedHashes fetch(std::span<const SymbolId> ids) const;

  /// Header line "n k' d' q v", then one "i,j<TAB>l,m<TAB>value" line per
  /// pair in sorted order; all fields decimal and tab-separated.
  void write(std::ostream& out) const;
  /// Reads exactly one store as produced by write(). The result is sealed.
  static HashStore read(std::istream& in);

 private:
  std::size_t symbol_index(const SymbolId& id) const;
  std::size_t pair_index(std::size_t x, std::size_t y) const;
  SymbolId symbol_at(std::size_t index) const;
  void require_sealed() const;

  HashStoreHeader header_;
  std::size_t theta_ = 0;
  bool sealed_ = false;
  std::vector<Element> values_;
};

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Reduces to lowest terms with a positive denominator.
Rational make_rational(std::int64_t num, std::int64_t den);

/// C(theta, 2) / (n * alpha * v): trusted-server size relative to stored data.
Rational overhead_ratio(const SystemParams& params);

}  // namespace pmguard
