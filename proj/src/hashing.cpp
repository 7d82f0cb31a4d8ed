#include "pmguard/hashing.hpp"

#include <algorithm>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "pmguard/error.hpp"

namespace pmguard {

SymbolPair::SymbolPair(SymbolId a, SymbolId b) : first_(std::min(a, b)), second_(std::max(a, b)) {
  if (a == b) {
    throw Error(ErrorCode::SamePair, "hash needs two distinct symbols, got " + to_string(a) + " twice");
  }
}

Element correlation_hash(const PrimeField& field, const CrossSymbol& x, const CrossSymbol& y) {
  if (x.id == y.id) {
    throw Error(ErrorCode::SamePair, "hash needs two distinct symbols, got " + to_string(x.id) + " twice");
  }
  return field.dot(x.value, y.value);
}

Element TrustedHashes::lookup(SymbolId a, SymbolId b) const {
  const auto it = entries_.find(SymbolPair(a, b));
  if (it == entries_.end()) {
    throw Error(ErrorCode::MissingHash, "no trusted hash for (" + to_string(a) + ")x(" + to_string(b) + ")");
  }
  return it->second;
}

namespace {

std::size_t choose2(std::size_t n) { return n * (n - 1) / 2; }

}  // namespace

HashStore::HashStore(const SystemParams& params)
    : HashStore(HashStoreHeader{params.n, params.k_prime, params.d_prime, params.q, params.v}) {}

HashStore::HashStore(const HashStoreHeader& header) : header_(header) {
  if (header.n < 2) {
    throw Error(ErrorCode::InvalidArgument, "a hash store needs at least two nodes");
  }
  theta_ = choose2(static_cast<std::size_t>(header.n));
}

std::size_t HashStore::symbol_index(const SymbolId& id) const {
  if (id.lo() < 1 || id.hi() > header_.n) {
    throw Error(ErrorCode::UnknownSymbolId, "symbol " + to_string(id) + " is not part of an n=" +
                                                std::to_string(header_.n) + " system");
  }
  const auto n = static_cast<std::size_t>(header_.n);
  const auto lo = static_cast<std::size_t>(id.lo() - 1);
  const auto hi = static_cast<std::size_t>(id.hi() - 1);
  return lo * n - lo * (lo + 1) / 2 + (hi - lo - 1);
}

SymbolId HashStore::symbol_at(std::size_t index) const {
  for (NodeId i = 1; i <= header_.n; ++i) {
    const auto row = static_cast<std::size_t>(header_.n - i);
    if (index < row) {
      return SymbolId(i, i + 1 + static_cast<NodeId>(index));
    }
    index -= row;
  }
  throw Error(ErrorCode::UnknownSymbolId, "symbol index out of range");
}

std::size_t HashStore::pair_index(std::size_t x, std::size_t y) const {
  return x * theta_ - x * (x + 1) / 2 + (y - x - 1);
}

void HashStore::require_sealed() const {
  if (!sealed_) {
    throw Error(ErrorCode::InvalidArgument, "hash store has not been populated");
  }
}

void HashStore::populate(const CrossSymbolSet& symbols) {
  if (sealed_) {
    throw Error(ErrorCode::StoreSealed, "hash store is sealed");
  }
  std::vector<const Symbol*> ordered(theta_, nullptr);
  for (const auto& [id, value] : symbols) {
    if (value.size() != header_.v) {
      throw Error(ErrorCode::LengthMismatch, "symbol " + to_string(id) + " has the wrong length");
    }
    ordered[symbol_index(id)] = &value;
  }
  for (std::size_t x = 0; x < theta_; ++x) {
    if (ordered[x] == nullptr) {
      throw Error(ErrorCode::IncompleteSymbolSet, "missing cross symbol " + to_string(symbol_at(x)));
    }
  }
  const PrimeField field(header_.q);
  std::vector<Element> values(choose2(theta_));
  for (std::size_t x = 0; x < theta_; ++x) {
    for (std::size_t y = x + 1; y < theta_; ++y) {
      values[pair_index(x, y)] = field.dot(*ordered[x], *ordered[y]);
    }
  }
  values_ = std::move(values);
  sealed_ = true;
}

Element HashStore::hash(SymbolId a, SymbolId b) const {
  require_sealed();
  const SymbolPair pair(a, b);
  return values_[pair_index(symbol_index(pair.first()), symbol_index(pair.second()))];
}

TrustedHashes HashStore::fetch(std::span<const SymbolId> ids) const {
  require_sealed();
  const std::set<SymbolId> unique(ids.begin(), ids.end());
  for (const auto& id : unique) {
    symbol_index(id);
  }
  std::map<SymbolPair, Element> out;
  for (auto x = unique.begin(); x != unique.end(); ++x) {
    for (auto y = std::next(x); y != unique.end(); ++y) {
      out.emplace(SymbolPair(*x, *y), hash(*x, *y));
    }
  }
  return TrustedHashes(std::move(out));
}

void HashStore::write(std::ostream& out) const {
  require_sealed();
  out << header_.n << '\t' << header_.k_prime << '\t' << header_.d_prime << '\t' << header_.q << '\t' << header_.v
      << '\n';
  for (std::size_t x = 0; x < theta_; ++x) {
    const std::string a = to_string(symbol_at(x));
    for (std::size_t y = x + 1; y < theta_; ++y) {
      out << a << '\t' << to_string(symbol_at(y)) << '\t' << values_[pair_index(x, y)].value << '\n';
    }
  }
}

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedInput, "hash store: " + what);
}

std::uint64_t parse_u64(const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    malformed("expected a decimal number, got '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    malformed("number out of range: '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == sep) {
    fields.emplace_back();
  }
  return fields;
}

SymbolId parse_id(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) {
    malformed("bad symbol id '" + text + "'");
  }
  return SymbolId(static_cast<NodeId>(parse_u64(parts[0])), static_cast<NodeId>(parse_u64(parts[1])));
}

}  // namespace

HashStore HashStore::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    malformed("missing header");
  }
  const auto head = split(line, '\t');
  if (head.size() != 5) {
    malformed("header needs 5 fields");
  }
  HashStoreHeader header;
  header.n = static_cast<int>(parse_u64(head[0]));
  header.k_prime = static_cast<int>(parse_u64(head[1]));
  header.d_prime = static_cast<int>(parse_u64(head[2]));
  header.q = parse_u64(head[3]);
  header.v = static_cast<std::size_t>(parse_u64(head[4]));
  if (header.q < 2 || header.n < 2) {
    malformed("header values out of range");
  }

  HashStore store(header);
  store.values_.assign(choose2(store.theta_), Element{});
  for (std::size_t x = 0; x < store.theta_; ++x) {
    const SymbolId a = store.symbol_at(x);
    for (std::size_t y = x + 1; y < store.theta_; ++y) {
      if (!std::getline(in, line)) {
        malformed("truncated after " + std::to_string(store.pair_index(x, y)) + " entries");
      }
      const auto fields = split(line, '\t');
      if (fields.size() != 3) {
        malformed("entry needs 3 fields: '" + line + "'");
      }
      if (parse_id(fields[0]) != a || parse_id(fields[1]) != store.symbol_at(y)) {
        malformed("entries out of order at '" + line + "'");
      }
      const std::uint64_t value = parse_u64(fields[2]);
      if (value >= header.q) {
        malformed("hash value not reduced mod q");
      }
      store.values_[store.pair_index(x, y)] = Element{value};
    }
  }
  store.sealed_ = true;
  return store;
}

Rational make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) {
    throw Error(ErrorCode::InvalidArgument, "zero denominator");
  }
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

Rational overhead_ratio(const SystemParams& params) {
  const auto theta = static_cast<std::int64_t>(choose2(static_cast<std::size_t>(params.n)));
  const std::int64_t hashes = theta * (theta - 1) / 2;
  return make_rational(hashes, static_cast<std::int64_t>(params.n) * params.alpha * static_cast<std::int64_t>(params.v));
}

}  // namespace pmguard
