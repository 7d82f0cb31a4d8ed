#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pmguard/field.hpp"

namespace pmguard {

using NodeId = int;  // 1-based

/// Parameters of an (n, k, d) storage system secured against b compromised
/// nodes, and of the (n, k - b, d - b) minimum-bandwidth product-matrix code
/// that backs it. The per-link repair bandwidth is normalized to one symbol.
struct SystemParams {
  int n = 0;
  int k = 0;
  int d = 0;
  int b = 0;
  std::uint64_t q = 0;
  std::size_t v = 0;
  int beta = 1;

  int k_prime = 0;          // k - b
  int d_prime = 0;          // d - b
  int alpha = 0;            // symbols stored per node, d' * beta
  int file_size = 0;        // B, file symbols per stripe
  int secure_capacity = 0;  // C_s

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// Every violated constraint, as human-readable strings. Empty when valid.
std::vector<std::string> param_violations(int n, int k, int d, int b, std::uint64_t q, std::size_t v);

/// Throws InvalidParams listing every violation.
SystemParams make_params(int n, int k, int d, int b, std::uint64_t q, std::size_t v);

/// Sum_{i=b+1..k} (d - i + 1) * beta. No validation; b >= k yields 0.
int secure_capacity(int k, int d, int b, int beta = 1);
int secure_capacity(const SystemParams& params);

/// Sum_{i=b+1..k} min(alpha, (d - i + 1) * beta) for arbitrary alpha, beta.
int capacity_upper_bound(int k, int d, int b, int alpha, int beta);
int capacity_upper_bound(const SystemParams& params, int alpha, int beta);

/// File symbols an MBR product-matrix code with parameters (k, d) stores.
int mbr_file_size(int k, int d);

/// Unordered pair {i, j} naming the cross symbol X_ij = X_ji.
class SymbolId {
 public:
  /// Throws SamePair when i == j.
  SymbolId(NodeId i, NodeId j);

  NodeId lo() const noexcept { return lo_; }
  NodeId hi() const noexcept { return hi_; }
  bool involves(NodeId node) const noexcept { return lo_ == node || hi_ == node; }
  /// The endpoint that is not `node`.
  NodeId other(NodeId node) const noexcept { return lo_ == node ? hi_ : lo_; }

  friend auto operator<=>(const SymbolId&, const SymbolId&) = default;

 private:
  NodeId lo_;
  NodeId hi_;
};

std::string to_string(const SymbolId& id);

/// n x d' Vandermonde matrix; row i (1-based) holds the powers of i.
class EncodingMatrix {
 public:
  EncodingMatrix() = default;
  explicit EncodingMatrix(Matrix psi) : psi_(std::move(psi)) {}

  const Matrix& matrix() const noexcept { return psi_; }
  std::span<const Element> row(NodeId i) const { return psi_.row(static_cast<std::size_t>(i - 1)); }
  int node_count() const noexcept { return static_cast<int>(psi_.rows()); }
  int width() const noexcept { return static_cast<int>(psi_.cols()); }

 private:
  Matrix psi_;
};

EncodingMatrix build_encoding_matrix(const SystemParams& params);

/// Position (row, col) in M of each file symbol, in file order: the upper
/// triangle of S row by row, then T row by row.
std::vector<std::pair<std::size_t, std::size_t>> message_layout(int k_prime, int d_prime);

/// Symmetric d' x d' matrix [[S, T], [T^t, 0]] holding the B file symbols.
class MessageMatrix {
 public:
  MessageMatrix(SymbolMatrix m, int k_prime) : m_(std::move(m)), k_prime_(k_prime) {}

  const SymbolMatrix& matrix() const noexcept { return m_; }
  const Symbol& at(std::size_t r, std::size_t c) const { return m_.at(r, c); }
  int dimension() const noexcept { return static_cast<int>(m_.rows()); }
  int k_prime() const noexcept { return k_prime_; }

  std::vector<Symbol> file_symbols() const;

 private:
  SymbolMatrix m_;
  int k_prime_;
};

/// Throws WrongSymbolCount unless file has exactly B symbols of length v.
MessageMatrix build_message_matrix(const SystemParams& params, std::span<const Symbol> file);

struct CrossSymbol {
  SymbolId id;
  Symbol value;
};

using CrossSymbolSet = std::map<SymbolId, Symbol>;

/// What one node stores: X_{node, p} for each partner p, in partner order.
struct NodeState {
  NodeId node_id = 0;
  std::vector<NodeId> partners;
  std::vector<Symbol> symbols;

  SymbolId id_at(std::size_t s) const { return SymbolId(node_id, partners[s]); }

  friend bool operator==(const NodeState&, const NodeState&) = default;
};

/// The first alpha ids of 1..n other than `node`, increasing.
std::vector<NodeId> stored_partners(const SystemParams& params, NodeId node);

struct HelperResponse {
  NodeId helper = 0;
  Symbol value;
};

struct EncodedSystem {
  std::vector<NodeState> nodes;  // nodes[i - 1] is node i
  CrossSymbolSet symbols;        // all C(n, 2) cross symbols

  const NodeState& node(NodeId i) const { return nodes.at(static_cast<std::size_t>(i - 1)); }
};

/// Exact-repair MBR product-matrix code in the cross-symbol representation.
class PmCode {
 public:
  explicit PmCode(const SystemParams& params);

  const SystemParams& params() const noexcept { return params_; }
  const PrimeField& field() const noexcept { return field_; }
  const EncodingMatrix& encoding() const noexcept { return psi_; }

  /// psi_i M psi_j^t. Throws SamePair when i == j.
  CrossSymbol cross_symbol(const MessageMatrix& m, NodeId i, NodeId j) const;

  EncodedSystem encode(std::span<const Symbol> file) const;

  /// Recovers the coded row psi_i M of a node from its stored symbols.
  std::vector<Symbol> coded_row(const NodeState& node) const;

  /// X_{node, target}, computed from the node's stored symbols.
  CrossSymbol derive_symbol(const NodeState& node, NodeId target) const;

  /// Regenerates node `failed` from helper symbols X_{h, failed}. Only the
  /// first d' responses are used. Responses are trusted as given.
  NodeState repair(NodeId failed, std::span<const HelperResponse> responses) const;

  /// Recovers the B file symbols from the first k' of the given nodes.
  std::vector<Symbol> reconstruct(std::span<const NodeState> nodes) const;

 private:
  void check_node(NodeId i) const;

  SystemParams params_;
  PrimeField field_;
  EncodingMatrix psi_;
};

}  // namespace pmguard
