#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "pmguard/field.hpp"
#include "pmguard/hashing.hpp"
#include "pmguard/pm_code.hpp"
#include "pmguard/random.hpp"

namespace pmguard {

enum class Strategy {
  Zeroing,            // replace every emitted symbol with the zero vector
  RandomError,        // add a uniform nonzero error
  TargetedCollision,  // add an error orthogonal to everything the adversary observes
  Omniscient,         // add an error orthogonal to every symbol in the system
};

std::string_view to_string(Strategy s);
/// Accepts zeroing, random_error, targeted, omniscient. Throws InvalidArgument.
Strategy parse_strategy(std::string_view name);

/// Uniform nonzero e with e . c = 0 for every constraint c, or nullopt when
/// only the zero vector qualifies.
std::optional<Symbol> random_orthogonal_error(const PrimeField& field, std::span<const Symbol> constraints,
                                              std::size_t length, Rng& rng);

/// Probability that a fixed nonzero error is orthogonal to a uniform symbol.
Rational collision_success_probability(std::uint64_t q);

/// Coefficients of X_ij as a linear function of the B file symbols.
std::vector<Element> symbol_coefficients(const PmCode& code, SymbolId id);

/// Rank of the linear map file -> (X_id for id in ids).
std::size_t knowledge_rank(const PmCode& code, std::span<const SymbolId> ids);

/// True when the listed symbols determine `target` for every file.
bool determines(const PmCode& code, std::span<const SymbolId> known, SymbolId target);

/// One colluding adversary controlling up to b nodes. Corruption is persistent
/// per symbol id unless fresh_per_message is enabled.
class Adversary {
 public:
  /// Reads the controlled nodes' storage plus the symbols derivable from it.
  /// The Omniscient strategy additionally reads every cross symbol. Throws
  /// BudgetExceeded when more than b nodes are requested.
  static Adversary observe(const PmCode& code, const EncodedSystem& system, std::set<NodeId> controlled,
                           Strategy strategy, std::uint64_t seed);

  const std::set<NodeId>& controlled() const noexcept { return controlled_; }
  bool controls(NodeId node) const { return controlled_.contains(node); }
  Strategy strategy() const noexcept { return strategy_; }

  /// X_cj for every controlled c and every j != c.
  const CrossSymbolSet& observation() const noexcept { return observation_; }
  /// Vectors the targeted errors are made orthogonal to.
  std::span<const Symbol> constraints() const noexcept { return constraints_; }
  /// False when the targeted strategies had to fall back to random errors.
  bool can_target() const noexcept { return !orthogonal_basis_.empty(); }

  /// Leave this symbol unmodified.
  void spare(SymbolId id) { spared_.insert(id); }
  void set_fresh_per_message(bool fresh) { fresh_per_message_ = fresh; }

  /// The value a controlled node emits in place of `true_value`. Throws
  /// NotControlled unless the id involves a controlled node.
  Symbol corrupt(SymbolId id, const Symbol& true_value);

  /// Applies corrupt() to every symbol of a controlled node.
  NodeState corrupt_node(const NodeState& true_state);

 private:
  Adversary(const PmCode& code, std::set<NodeId> controlled, Strategy strategy, std::uint64_t seed);

  Symbol draw_error();

  PrimeField field_;
  std::size_t length_;
  std::set<NodeId> controlled_;
  Strategy strategy_;
  Rng rng_;
  CrossSymbolSet observation_;
  std::vector<Symbol> constraints_;
  std::vector<Symbol> orthogonal_basis_;
  std::set<SymbolId> spared_;
  std::map<SymbolId, Symbol> memo_;
  bool fresh_per_message_ = false;
};

}  // namespace pmguard
