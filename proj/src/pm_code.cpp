#include "pmguard/pm_code.hpp"

#include <algorithm>
#include <set>

#include "pmguard/error.hpp"

namespace pmguard {

std::vector<std::string> param_violations(int n, int k, int d, int b, std::uint64_t q, std::size_t v) {
  std::vector<std::string> out;
  if (k < 1) {
    out.push_back("k must be at least 1 (k=" + std::to_string(k) + ")");
  }
  if (d < k) {
    out.push_back("d must be at least k (d=" + std::to_string(d) + ", k=" + std::to_string(k) + ")");
  }
  if (d > n - 1) {
    out.push_back("d must be at most n-1 (d=" + std::to_string(d) + ", n=" + std::to_string(n) + ")");
  }
  if (b < 0) {
    out.push_back("b must be nonnegative (b=" + std::to_string(b) + ")");
  }
  if (2 * b >= k) {
    out.push_back("b must be below k/2 (b=" + std::to_string(b) + ", k=" + std::to_string(k) + ")");
  }
  if (q >= (std::uint64_t{1} << 32) || !is_prime(q)) {
    out.push_back("q must be a prime below 2^32 (q=" + std::to_string(q) + ")");
  }
  if (n < 0 || q <= static_cast<std::uint64_t>(n)) {
    out.push_back("q must exceed n (q=" + std::to_string(q) + ", n=" + std::to_string(n) + ")");
  }
  if (v < 1) {
    out.push_back("v must be at least 1");
  }
  return out;
}

SystemParams make_params(int n, int k, int d, int b, std::uint64_t q, std::size_t v) {
  const auto violations = param_violations(n, k, d, b, q, v);
  if (!violations.empty()) {
    std::string msg = "invalid parameters:";
    for (const auto& s : violations) {
      msg += " " + s + ";";
    }
    throw Error(ErrorCode::InvalidParams, msg);
  }
  SystemParams p;
  p.n = n;
  p.k = k;
  p.d = d;
  p.b = b;
  p.q = q;
  p.v = v;
  p.beta = 1;
  p.k_prime = k - b;
  p.d_prime = d - b;
  p.alpha = p.d_prime * p.beta;
  p.file_size = mbr_file_size(p.k_prime, p.d_prime);
  p.secure_capacity = secure_capacity(k, d, b, p.beta);
  return p;
}

int secure_capacity(int k, int d, int b, int beta) {
  int total = 0;
  for (int i = b + 1; i <= k; ++i) {
    total += (d - i + 1) * beta;
  }
  return total;
}

int secure_capacity(const SystemParams& params) { return secure_capacity(params.k, params.d, params.b, params.beta); }

int capacity_upper_bound(int k, int d, int b, int alpha, int beta) {
  int total = 0;
  for (int i = b + 1; i <= k; ++i) {
    total += std::min(alpha, (d - i + 1) * beta);
  }
  return total;
}

int capacity_upper_bound(const SystemParams& params, int alpha, int beta) {
  return capacity_upper_bound(params.k, params.d, params.b, alpha, beta);
}

int mbr_file_size(int k, int d) {
  int total = 0;
  for (int i = 1; i <= k; ++i) {
    total += d - i + 1;
  }
  return total;
}

SymbolId::SymbolId(NodeId i, NodeId j) : lo_(std::min(i, j)), hi_(std::max(i, j)) {
  if (i == j) {
    throw Error(ErrorCode::SamePair, "symbol id needs two distinct nodes, got " + std::to_string(i) + " twice");
  }
}

std::string to_string(const SymbolId& id) { return std::to_string(id.lo()) + "," + std::to_string(id.hi()); }

EncodingMatrix build_encoding_matrix(const SystemParams& params) {
  const PrimeField f(params.q);
  Matrix psi(static_cast<std::size_t>(params.n), static_cast<std::size_t>(params.d_prime));
  for (int i = 1; i <= params.n; ++i) {
    Element power{1};
    const Element g = f.element(i);
    for (int c = 0; c < params.d_prime; ++c) {
      psi.at(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(c)) = power;
      power = f.mul(power, g);
    }
  }
  return EncodingMatrix(std::move(psi));
}

std::vector<std::pair<std::size_t, std::size_t>> message_layout(int k_prime, int d_prime) {
  std::vector<std::pair<std::size_t, std::size_t>> layout;
  const auto kp = static_cast<std::size_t>(k_prime);
  const auto dp = static_cast<std::size_t>(d_prime);
  for (std::size_t r = 0; r < kp; ++r) {
    for (std::size_t c = r; c < kp; ++c) {
      layout.emplace_back(r, c);
    }
  }
  for (std::size_t r = 0; r < kp; ++r) {
    for (std::size_t c = kp; c < dp; ++c) {
      layout.emplace_back(r, c);
    }
  }
  return layout;
}

std::vector<Symbol> MessageMatrix::file_symbols() const {
  std::vector<Symbol> out;
  for (const auto& [r, c] : message_layout(k_prime_, dimension())) {
    out.push_back(m_.at(r, c));
  }
  return out;
}

MessageMatrix build_message_matrix(const SystemParams& params, std::span<const Symbol> file) {
  if (file.size() != static_cast<std::size_t>(params.file_size)) {
    throw Error(ErrorCode::WrongSymbolCount, "expected " + std::to_string(params.file_size) + " file symbols, got " +
                                                 std::to_string(file.size()));
  }
  for (const auto& s : file) {
    if (s.size() != params.v) {
      throw Error(ErrorCode::WrongSymbolCount, "file symbol has length " + std::to_string(s.size()) +
                                                   ", expected " + std::to_string(params.v));
    }
  }
  const auto dp = static_cast<std::size_t>(params.d_prime);
  SymbolMatrix m(dp, dp, params.v);
  const auto layout = message_layout(params.k_prime, params.d_prime);
  for (std::size_t t = 0; t < layout.size(); ++t) {
    const auto [r, c] = layout[t];
    m.at(r, c) = file[t];
    m.at(c, r) = file[t];
  }
  return MessageMatrix(std::move(m), params.k_prime);
}

std::vector<NodeId> stored_partners(const SystemParams& params, NodeId node) {
  std::vector<NodeId> partners;
  for (NodeId j = 1; j <= params.n && static_cast<int>(partners.size()) < params.alpha; ++j) {
    if (j != node) {
      partners.push_back(j);
    }
  }
  return partners;
}

PmCode::PmCode(const SystemParams& params)
    : params_(params), field_(params.q), psi_(build_encoding_matrix(params)) {}

void PmCode::check_node(NodeId i) const {
  if (i < 1 || i > params_.n) {
    throw Error(ErrorCode::InvalidArgument, "node id " + std::to_string(i) + " outside 1.." + std::to_string(params_.n));
  }
}

CrossSymbol PmCode::cross_symbol(const MessageMatrix& m, NodeId i, NodeId j) const {
  SymbolId id(i, j);
  check_node(i);
  check_node(j);
  const auto left = psi_.row(i);
  const auto right = psi_.row(j);
  Symbol value(params_.v);
  const auto dp = static_cast<std::size_t>(m.dimension());
  for (std::size_t a = 0; a < dp; ++a) {
    for (std::size_t c = 0; c < dp; ++c) {
      field_.axpy(field_.mul(left[a], right[c]), m.at(a, c), value);
    }
  }
  return {id, std::move(value)};
}

EncodedSystem PmCode::encode(std::span<const Symbol> file) const {
  const MessageMatrix m = build_message_matrix(params_, file);
  // Row i of psi * M is node i's coded row; X_ij is that row dotted with psi_j.
  const SymbolMatrix rows = field_.multiply(psi_.matrix(), m.matrix());
  const auto dp = static_cast<std::size_t>(params_.d_prime);

  EncodedSystem sys;
  for (NodeId i = 1; i <= params_.n; ++i) {
    for (NodeId j = i + 1; j <= params_.n; ++j) {
      Symbol value(params_.v);
      const auto col = psi_.row(j);
      for (std::size_t c = 0; c < dp; ++c) {
        field_.axpy(col[c], rows.at(static_cast<std::size_t>(i - 1), c), value);
      }
      sys.symbols.emplace(SymbolId(i, j), std::move(value));
    }
  }
  sys.nodes.reserve(static_cast<std::size_t>(params_.n));
  for (NodeId i = 1; i <= params_.n; ++i) {
    NodeState node;
    node.node_id = i;
    node.partners = stored_partners(params_, i);
    for (NodeId p : node.partners) {
      node.symbols.push_back(sys.symbols.at(SymbolId(i, p)));
    }
    sys.nodes.push_back(std::move(node));
  }
  return sys;
}

std::vector<Symbol> PmCode::coded_row(const NodeState& node) const {
  check_node(node.node_id);
  const auto dp = static_cast<std::size_t>(params_.d_prime);
  if (node.partners.size() != dp || node.symbols.size() != dp) {
    throw Error(ErrorCode::WrongSymbolCount, "node " + std::to_string(node.node_id) + " must hold " +
                                                 std::to_string(dp) + " symbols");
  }
  Matrix a(dp, dp);
  for (std::size_t s = 0; s < dp; ++s) {
    const NodeId p = node.partners[s];
    check_node(p);
    if (p == node.node_id) {
      throw Error(ErrorCode::SamePair, "node " + std::to_string(p) + " lists itself as a partner");
    }
    const auto r = psi_.row(p);
    std::copy(r.begin(), r.end(), a.row(s).begin());
  }
  return field_.solve(a, node.symbols);
}

CrossSymbol PmCode::derive_symbol(const NodeState& node, NodeId target) const {
  SymbolId id(node.node_id, target);
  check_node(target);
  for (std::size_t s = 0; s < node.partners.size(); ++s) {
    if (node.partners[s] == target) {
      return {id, node.symbols.at(s)};
    }
  }
  const std::vector<Symbol> row = coded_row(node);
  return {id, field_.combine(psi_.row(target), row)};
}

NodeState PmCode::repair(NodeId failed, std::span<const HelperResponse> responses) const {
  check_node(failed);
  std::set<NodeId> seen;
  for (const auto& r : responses) {
    check_node(r.helper);
    if (r.helper == failed) {
      throw Error(ErrorCode::InvalidArgument, "node " + std::to_string(failed) + " cannot help repair itself");
    }
    if (!seen.insert(r.helper).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate helper " + std::to_string(r.helper));
    }
  }
  const auto dp = static_cast<std::size_t>(params_.d_prime);
  if (responses.size() < dp) {
    throw Error(ErrorCode::NotEnoughHelpers, "repair needs " + std::to_string(dp) + " helpers, got " +
                                                 std::to_string(responses.size()));
  }
  Matrix a(dp, dp);
  std::vector<Symbol> rhs;
  for (std::size_t s = 0; s < dp; ++s) {
    const auto r = psi_.row(responses[s].helper);
    std::copy(r.begin(), r.end(), a.row(s).begin());
    rhs.push_back(responses[s].value);
  }
  // M psi_f^t, which by symmetry is also node f's coded row.
  const std::vector<Symbol> column = field_.solve(a, rhs);

  NodeState node;
  node.node_id = failed;
  node.partners = stored_partners(params_, failed);
  for (NodeId p : node.partners) {
    node.symbols.push_back(field_.combine(psi_.row(p), column));
  }
  return node;
}

std::vector<Symbol> PmCode::reconstruct(std::span<const NodeState> nodes) const {
  const auto kp = static_cast<std::size_t>(params_.k_prime);
  const auto dp = static_cast<std::size_t>(params_.d_prime);
  if (nodes.size() < kp) {
    throw Error(ErrorCode::NotEnoughNodes, "reconstruction needs " + std::to_string(kp) + " nodes, got " +
                                               std::to_string(nodes.size()));
  }
  std::set<NodeId> seen;
  for (std::size_t i = 0; i < kp; ++i) {
    if (!seen.insert(nodes[i].node_id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate node " + std::to_string(nodes[i].node_id));
    }
  }

  // Stack the coded rows: W = Psi_sub M, with Psi_sub = [Phi Delta].
  SymbolMatrix w(kp, dp, params_.v);
  Matrix phi(kp, kp);
  Matrix delta(kp, dp - kp);
  for (std::size_t i = 0; i < kp; ++i) {
    std::vector<Symbol> row = coded_row(nodes[i]);
    for (std::size_t c = 0; c < dp; ++c) {
      w.at(i, c) = std::move(row[c]);
    }
    const auto psi_row = psi_.row(nodes[i].node_id);
    for (std::size_t c = 0; c < kp; ++c) {
      phi.at(i, c) = psi_row[c];
    }
    for (std::size_t c = kp; c < dp; ++c) {
      delta.at(i, c - kp) = psi_row[c];
    }
  }

  // W = [Phi S + Delta T^t, Phi T].
  SymbolMatrix w_right(kp, dp - kp, params_.v);
  for (std::size_t i = 0; i < kp; ++i) {
    for (std::size_t c = kp; c < dp; ++c) {
      w_right.at(i, c - kp) = w.at(i, c);
    }
  }
  const SymbolMatrix t = field_.solve(phi, w_right);

  SymbolMatrix t_transposed(dp - kp, kp, params_.v);
  for (std::size_t r = 0; r < kp; ++r) {
    for (std::size_t c = 0; c < dp - kp; ++c) {
      t_transposed.at(c, r) = t.at(r, c);
    }
  }
  const SymbolMatrix delta_tt = field_.multiply(delta, t_transposed);
  SymbolMatrix phi_s(kp, kp, params_.v);
  for (std::size_t i = 0; i < kp; ++i) {
    for (std::size_t c = 0; c < kp; ++c) {
      phi_s.at(i, c) = field_.sub(w.at(i, c), delta_tt.at(i, c));
    }
  }
  const SymbolMatrix s = field_.solve(phi, phi_s);

  SymbolMatrix m(dp, dp, params_.v);
  for (std::size_t r = 0; r < kp; ++r) {
    for (std::size_t c = 0; c < kp; ++c) {
      m.at(r, c) = s.at(r, c);
    }
    for (std::size_t c = kp; c < dp; ++c) {
      m.at(r, c) = t.at(r, c - kp);
      m.at(c, r) = t.at(r, c - kp);
    }
  }
  return MessageMatrix(std::move(m), params_.k_prime).file_symbols();
}

}  // namespace pmguard
