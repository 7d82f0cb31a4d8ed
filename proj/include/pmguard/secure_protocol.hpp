#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmguard/error.hpp"
#include "pmguard/hashing.hpp"
#include "pmguard/pm_code.hpp"

namespace pmguard {

enum class CellMark { Match, Mismatch, Blank };

/// Symmetric helper-by-helper grid for one repair. Cell (a, b) compares the
/// dot product of two downloaded symbols with the trusted hash.
class RepairComparisonTable {
 public:
  RepairComparisonTable(NodeId failed, std::vector<NodeId> helpers);

  NodeId failed() const noexcept { return failed_; }
  const std::vector<NodeId>& helpers() const noexcept { return helpers_; }
  std::size_t size() const noexcept { return helpers_.size(); }

  CellMark mark(std::size_t a, std::size_t b) const { return marks_[a * helpers_.size() + b]; }
  /// Sets both (a, b) and (b, a).
  void set(std::size_t a, std::size_t b, CellMark m);

  std::size_t mismatches(std::size_t a) const;

  /// One line per helper: "<id>: " followed by '.', 'v' or 'x' per column.
  std::string render() const;

 private:
  NodeId failed_;
  std::vector<NodeId> helpers_;
  std::vector<CellMark> marks_;
};

/// k x k grid of alpha x alpha blocks. Block (i, j) cell (s, t) checks node
/// i's s-th downloaded symbol against node j's t-th one. Diagonal blocks are
/// blank.
class ReconstructionBlockTable {
 public:
  ReconstructionBlockTable(std::vector<NodeId> nodes, std::vector<std::vector<SymbolId>> ids);

  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t block_size() const noexcept { return alpha_; }
  const SymbolId& symbol_id(std::size_t node, std::size_t s) const { return ids_[node][s]; }

  CellMark cell(std::size_t i, std::size_t j, std::size_t s, std::size_t t) const {
    return marks_[index(i, j, s, t)];
  }
  /// Sets cell (s, t) of block (i, j) and cell (t, s) of block (j, i).
  void set(std::size_t i, std::size_t j, std::size_t s, std::size_t t, CellMark m);

  /// A block is mismatched when any of its cells is.
  bool block_mismatched(std::size_t i, std::size_t j) const;
  std::size_t mismatched_blocks(std::size_t i) const;

  /// One line per downloaded symbol, blocks separated by " | ".
  std::string render() const;

 private:
  std::size_t index(std::size_t i, std::size_t j, std::size_t s, std::size_t t) const {
    return ((i * nodes_.size() + j) * alpha_ + s) * alpha_ + t;
  }

  std::vector<NodeId> nodes_;
  std::vector<std::vector<SymbolId>> ids_;
  std::size_t alpha_;
  std::vector<CellMark> marks_;
};

struct DetectionReport {
  std::set<NodeId> detected;
  bool inconclusive = false;
  std::size_t residual_mismatches = 0;

  friend bool operator==(const DetectionReport&, const DetectionReport&) = default;
};

/// "scenario=<id> detected=<ids, comma-separated> inconclusive=<0|1> residual=<n>"
std::string to_record(const DetectionReport& report, std::string_view scenario);
/// Inverse of to_record; returns the scenario id through `scenario` if given.
DetectionReport parse_record(std::string_view record, std::string* scenario = nullptr);

/// A protocol failure that carries the detection report that caused it.
class DetectionError : public Error {
 public:
  DetectionError(ErrorCode code, const std::string& what, DetectionReport report)
      : Error(code, what), report_(std::move(report)) {}

  const DetectionReport& report() const noexcept { return report_; }

 private:
  DetectionReport report_;
};

/// Throws MissingHash if a needed trusted hash was not fetched.
RepairComparisonTable build_repair_table(const PrimeField& field, NodeId failed,
                                         std::span<const HelperResponse> responses, const TrustedHashes& trusted);

/// Flags every helper with more than b mismatches. Throws TooManyDetected
/// when that is more than b helpers.
DetectionReport detect_compromised_repair(const RepairComparisonTable& table, int b);

/// Cells pairing two copies of the same cross symbol (X_ij held by both i and
/// j) are checked by equality; all other cells against the trusted hash.
ReconstructionBlockTable build_reconstruction_table(const PrimeField& field, std::span<const NodeState> payloads,
                                                    const TrustedHashes& trusted);

/// Flags every node with more than b mismatched blocks. Throws
/// TooManyDetected when that is more than b nodes.
DetectionReport detect_compromised_reconstruction(const ReconstructionBlockTable& table, int b);

struct RepairOutcome {
  NodeState node;
  DetectionReport report;
  RepairComparisonTable table;
};

/// Repairs `failed` from exactly d helper responses while screening out up
/// to b compromised helpers. Throws DetectionError with code
/// InconclusiveDetection, TooManyDetected, NotEnoughCleanHelpers or
/// RepairVerificationFailed.
RepairOutcome secure_repair(const PmCode& code, NodeId failed, std::span<const HelperResponse> responses,
                            const HashStore& store);

struct ReconstructionOutcome {
  std::vector<Symbol> file;
  DetectionReport report;
  std::vector<NodeId> decoded_from;
  ReconstructionBlockTable table;
};

/// Recovers the file from exactly k downloaded nodes, treating detected nodes
/// as erasures and decoding from the lowest-numbered k' clean ones. Throws
/// DetectionError with code InconclusiveDetection, TooManyDetected or
/// NotEnoughCleanNodes.
ReconstructionOutcome secure_reconstruct(const PmCode& code, std::span<const NodeState> payloads,
                                         const HashStore& store);

}  // namespace pmguard
