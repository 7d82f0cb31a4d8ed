#include "pmguard/adversary.hpp"

#include <string>

#include "pmguard/error.hpp"

namespace pmguard {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Zeroing: return "zeroing";
    case Strategy::RandomError: return "random_error";
    case Strategy::TargetedCollision: return "targeted";
    case Strategy::Omniscient: return "omniscient";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "zeroing" || name == "zero") return Strategy::Zeroing;
  if (name == "random_error" || name == "random") return Strategy::RandomError;
  if (name == "targeted" || name == "targeted_collision") return Strategy::TargetedCollision;
  if (name == "omniscient") return Strategy::Omniscient;
  throw Error(ErrorCode::InvalidArgument, "unknown strategy '" + std::string(name) + "'");
}

namespace {

Matrix rows_of(std::span<const Symbol> vectors, std::size_t length) {
  Matrix m(vectors.size(), length);
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    for (std::size_t c = 0; c < length; ++c) {
      m.at(r, c) = vectors[r][c];
    }
  }
  return m;
}

std::vector<Symbol> orthogonal_complement(const PrimeField& field, std::span<const Symbol> constraints,
                                          std::size_t length) {
  if (constraints.empty()) {
    std::vector<Symbol> basis;
    for (std::size_t c = 0; c < length; ++c) {
      Symbol e(length);
      e[c] = Element{1};
      basis.push_back(std::move(e));
    }
    return basis;
  }
  return field.null_space(rows_of(constraints, length));
}

Symbol random_span_member(const PrimeField& field, std::span<const Symbol> basis, Rng& rng) {
  for (;;) {
    Symbol e(basis.front().size());
    for (const auto& b : basis) {
      field.axpy(field.random_element(rng), b, e);
    }
    if (!e.is_zero()) {
      return e;
    }
  }
}

}  // namespace

std::optional<Symbol> random_orthogonal_error(const PrimeField& field, std::span<const Symbol> constraints,
                                              std::size_t length, Rng& rng) {
  const auto basis = orthogonal_complement(field, constraints, length);
  if (basis.empty()) {
    return std::nullopt;
  }
  return random_span_member(field, basis, rng);
}

Rational collision_success_probability(std::uint64_t q) {
  if (!is_prime(q)) {
    throw Error(ErrorCode::InvalidParams, "q must be prime");
  }
  return make_rational(1, static_cast<std::int64_t>(q));
}

std::vector<Element> symbol_coefficients(const PmCode& code, SymbolId id) {
  // Encoding the unit file (U_t = e_t, v = B) turns X_ij into its own
  // coefficient vector.
  SystemParams unit = code.params();
  unit.v = static_cast<std::size_t>(unit.file_size);
  std::vector<Symbol> file;
  for (std::size_t t = 0; t < unit.v; ++t) {
    Symbol e(unit.v);
    e[t] = Element{1};
    file.push_back(std::move(e));
  }
  const PmCode unit_code(unit);
  const MessageMatrix m = build_message_matrix(unit, file);
  const Symbol x = unit_code.cross_symbol(m, id.lo(), id.hi()).value;
  return {x.begin(), x.end()};
}

std::size_t knowledge_rank(const PmCode& code, std::span<const SymbolId> ids) {
  const auto b = static_cast<std::size_t>(code.params().file_size);
  Matrix m(ids.size(), b);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto coeffs = symbol_coefficients(code, ids[r]);
    for (std::size_t c = 0; c < b; ++c) {
      m.at(r, c) = coeffs[c];
    }
  }
  return code.field().rank(std::move(m));
}

bool determines(const PmCode& code, std::span<const SymbolId> known, SymbolId target) {
  std::vector<SymbolId> extended(known.begin(), known.end());
  extended.push_back(target);
  return knowledge_rank(code, known) == knowledge_rank(code, extended);
}

Adversary::Adversary(const PmCode& code, std::set<NodeId> controlled, Strategy strategy, std::uint64_t seed)
    : field_(code.field()),
      length_(code.params().v),
      controlled_(std::move(controlled)),
      strategy_(strategy),
      rng_(seed) {}

Adversary Adversary::observe(const PmCode& code, const EncodedSystem& system, std::set<NodeId> controlled,
                             Strategy strategy, std::uint64_t seed) {
  const SystemParams& params = code.params();
  if (controlled.size() > static_cast<std::size_t>(params.b)) {
    throw Error(ErrorCode::BudgetExceeded, "adversary may control " + std::to_string(params.b) + " nodes, asked for " +
                                               std::to_string(controlled.size()));
  }
  for (NodeId c : controlled) {
    if (c < 1 || c > params.n) {
      throw Error(ErrorCode::InvalidArgument, "node id " + std::to_string(c) + " out of range");
    }
  }
  Adversary adv(code, std::move(controlled), strategy, seed);
  for (NodeId c : adv.controlled_) {
    const NodeState& node = system.node(c);
    for (NodeId j = 1; j <= params.n; ++j) {
      if (j != c) {
        CrossSymbol x = code.derive_symbol(node, j);
        adv.observation_.emplace(x.id, std::move(x.value));
      }
    }
  }
  if (strategy == Strategy::TargetedCollision) {
    for (const auto& [id, value] : adv.observation_) {
      adv.constraints_.push_back(value);
    }
  } else if (strategy == Strategy::Omniscient) {
    for (const auto& [id, value] : system.symbols) {
      adv.constraints_.push_back(value);
    }
  }
  adv.orthogonal_basis_ = orthogonal_complement(adv.field_, adv.constraints_, adv.length_);
  return adv;
}

Symbol Adversary::draw_error() {
  if ((strategy_ == Strategy::TargetedCollision || strategy_ == Strategy::Omniscient) && !orthogonal_basis_.empty()) {
    return random_span_member(field_, orthogonal_basis_, rng_);
  }
  return field_.random_nonzero_symbol(length_, rng_);
}

Symbol Adversary::corrupt(SymbolId id, const Symbol& true_value) {
  if (!controls(id.lo()) && !controls(id.hi())) {
    throw Error(ErrorCode::NotControlled, "symbol " + to_string(id) + " does not originate at a controlled node");
  }
  if (spared_.contains(id)) {
    return true_value;
  }
  if (!fresh_per_message_) {
    if (auto it = memo_.find(id); it != memo_.end()) {
      return it->second;
    }
  }
  Symbol out = strategy_ == Strategy::Zeroing ? Symbol::zero(true_value.size())
                                              : field_.add(true_value, draw_error());
  if (!fresh_per_message_) {
    memo_.emplace(id, out);
  }
  return out;
}

NodeState Adversary::corrupt_node(const NodeState& true_state) {
  if (!controls(true_state.node_id)) {
    throw Error(ErrorCode::NotControlled, "node " + std::to_string(true_state.node_id) + " is not controlled");
  }
  NodeState out = true_state;
  for (std::size_t s = 0; s < out.symbols.size(); ++s) {
    out.symbols[s] = corrupt(out.id_at(s), true_state.symbols[s]);
  }
  return out;
}

}  // namespace pmguard
