#include "pmguard/secure_protocol.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace pmguard {

RepairComparisonTable::RepairComparisonTable(NodeId failed, std::vector<NodeId> helpers)
    : failed_(failed), helpers_(std::move(helpers)), marks_(helpers_.size() * helpers_.size(), CellMark::Blank) {}

void RepairComparisonTable::set(std::size_t a, std::size_t b, CellMark m) {
  marks_[a * helpers_.size() + b] = m;
  marks_[b * helpers_.size() + a] = m;
}

std::size_t RepairComparisonTable::mismatches(std::size_t a) const {
  std::size_t count = 0;
  for (std::size_t b = 0; b < helpers_.size(); ++b) {
    count += mark(a, b) == CellMark::Mismatch ? 1 : 0;
  }
  return count;
}

namespace {

char glyph(CellMark m) {
  switch (m) {
    case CellMark::Match: return 'v';
    case CellMark::Mismatch: return 'x';
    case CellMark::Blank: return '.';
  }
  return '?';
}

}  // namespace

std::string RepairComparisonTable::render() const {
  std::ostringstream out;
  for (std::size_t a = 0; a < helpers_.size(); ++a) {
    out << helpers_[a] << ':';
    for (std::size_t b = 0; b < helpers_.size(); ++b) {
      out << ' ' << glyph(mark(a, b));
    }
    out << '\n';
  }
  return out.str();
}

ReconstructionBlockTable::ReconstructionBlockTable(std::vector<NodeId> nodes, std::vector<std::vector<SymbolId>> ids)
    : nodes_(std::move(nodes)), ids_(std::move(ids)), alpha_(ids_.empty() ? 0 : ids_.front().size()) {
  marks_.assign(nodes_.size() * nodes_.size() * alpha_ * alpha_, CellMark::Blank);
}

void ReconstructionBlockTable::set(std::size_t i, std::size_t j, std::size_t s, std::size_t t, CellMark m) {
  marks_[index(i, j, s, t)] = m;
  marks_[index(j, i, t, s)] = m;
}

bool ReconstructionBlockTable::block_mismatched(std::size_t i, std::size_t j) const {
  for (std::size_t s = 0; s < alpha_; ++s) {
    for (std::size_t t = 0; t < alpha_; ++t) {
      if (cell(i, j, s, t) == CellMark::Mismatch) {
        return true;
      }
    }
  }
  return false;
}

std::size_t ReconstructionBlockTable::mismatched_blocks(std::size_t i) const {
  std::size_t count = 0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    count += (j != i && block_mismatched(i, j)) ? 1 : 0;
  }
  return count;
}

std::string ReconstructionBlockTable::render() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (std::size_t s = 0; s < alpha_; ++s) {
      const SymbolId& id = ids_[i][s];
      out << 'X' << nodes_[i] << id.other(nodes_[i]) << ':';
      for (std::size_t j = 0; j < nodes_.size(); ++j) {
        out << (j == 0 ? " " : " | ");
        for (std::size_t t = 0; t < alpha_; ++t) {
          out << (t == 0 ? "" : " ") << glyph(cell(i, j, s, t));
        }
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string to_record(const DetectionReport& report, std::string_view scenario) {
  std::ostringstream out;
  out << "scenario=" << scenario << " detected=";
  bool first = true;
  for (NodeId id : report.detected) {
    out << (first ? "" : ",") << id;
    first = false;
  }
  out << " inconclusive=" << (report.inconclusive ? 1 : 0) << " residual=" << report.residual_mismatches;
  return out.str();
}

namespace {

std::size_t parse_count(std::string_view text) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::MalformedInput, "bad number in detection record: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

DetectionReport parse_record(std::string_view record, std::string* scenario) {
  DetectionReport report;
  bool saw[4] = {false, false, false, false};
  std::istringstream in{std::string(record)};
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::MalformedInput, "detection record token without '=': '" + token + "'");
    }
    const std::string key = token.substr(0, eq);
    const std::string_view value = std::string_view(token).substr(eq + 1);
    if (key == "scenario") {
      saw[0] = true;
      if (scenario != nullptr) {
        *scenario = std::string(value);
      }
    } else if (key == "detected") {
      saw[1] = true;
      std::size_t start = 0;
      while (start < value.size()) {
        const auto comma = value.find(',', start);
        const auto end = comma == std::string_view::npos ? value.size() : comma;
        report.detected.insert(static_cast<NodeId>(parse_count(value.substr(start, end - start))));
        start = end + 1;
      }
    } else if (key == "inconclusive") {
      saw[2] = true;
      report.inconclusive = parse_count(value) != 0;
    } else if (key == "residual") {
      saw[3] = true;
      report.residual_mismatches = parse_count(value);
    } else {
      throw Error(ErrorCode::MalformedInput, "unknown detection record key '" + key + "'");
    }
  }
  if (!(saw[0] && saw[1] && saw[2] && saw[3])) {
    throw Error(ErrorCode::MalformedInput, "detection record is missing fields");
  }
  return report;
}

RepairComparisonTable build_repair_table(const PrimeField& field, NodeId failed,
                                         std::span<const HelperResponse> responses, const TrustedHashes& trusted) {
  std::vector<NodeId> helpers;
  helpers.reserve(responses.size());
  for (const auto& r : responses) {
    helpers.push_back(r.helper);
  }
  RepairComparisonTable table(failed, std::move(helpers));
  for (std::size_t a = 0; a < responses.size(); ++a) {
    const SymbolId id_a(responses[a].helper, failed);
    for (std::size_t b = a + 1; b < responses.size(); ++b) {
      const SymbolId id_b(responses[b].helper, failed);
      const Element expected = trusted.lookup(id_a, id_b);
      const Element computed = field.dot(responses[a].value, responses[b].value);
      table.set(a, b, computed == expected ? CellMark::Match : CellMark::Mismatch);
    }
  }
  return table;
}

namespace {

std::string list_ids(const std::set<NodeId>& ids) {
  std::string out;
  for (NodeId id : ids) {
    out += (out.empty() ? "" : ",") + std::to_string(id);
  }
  return out;
}

void enforce_budget(const DetectionReport& report, int b) {
  if (report.detected.size() > static_cast<std::size_t>(b)) {
    throw DetectionError(ErrorCode::TooManyDetected,
                         "detected " + std::to_string(report.detected.size()) + " nodes (" +
                             list_ids(report.detected) + ") but at most " + std::to_string(b) +
                             " can be compromised",
                         report);
  }
}

}  // namespace

DetectionReport detect_compromised_repair(const RepairComparisonTable& table, int b) {
  DetectionReport report;
  std::vector<bool> flagged(table.size(), false);
  for (std::size_t a = 0; a < table.size(); ++a) {
    if (table.mismatches(a) > static_cast<std::size_t>(b)) {
      flagged[a] = true;
      report.detected.insert(table.helpers()[a]);
    }
  }
  for (std::size_t a = 0; a < table.size(); ++a) {
    for (std::size_t c = a + 1; c < table.size(); ++c) {
      if (!flagged[a] && !flagged[c] && table.mark(a, c) == CellMark::Mismatch) {
        ++report.residual_mismatches;
      }
    }
  }
  report.inconclusive = report.residual_mismatches > 0;
  enforce_budget(report, b);
  return report;
}

ReconstructionBlockTable build_reconstruction_table(const PrimeField& field, std::span<const NodeState> payloads,
                                                    const TrustedHashes& trusted) {
  std::vector<NodeId> nodes;
  std::vector<std::vector<SymbolId>> ids;
  const std::size_t alpha = payloads.empty() ? 0 : payloads.front().symbols.size();
  for (const auto& p : payloads) {
    if (p.symbols.size() != alpha || p.partners.size() != alpha) {
      throw Error(ErrorCode::WrongSymbolCount, "node " + std::to_string(p.node_id) + " sent a malformed payload");
    }
    nodes.push_back(p.node_id);
    std::vector<SymbolId> node_ids;
    for (std::size_t s = 0; s < alpha; ++s) {
      node_ids.push_back(p.id_at(s));
    }
    ids.push_back(std::move(node_ids));
  }
  ReconstructionBlockTable table(std::move(nodes), std::move(ids));
  for (std::size_t i = 0; i < payloads.size(); ++i) {
    for (std::size_t j = i + 1; j < payloads.size(); ++j) {
      for (std::size_t s = 0; s < alpha; ++s) {
        const SymbolId& id_s = table.symbol_id(i, s);
        const Symbol& x = payloads[i].symbols[s];
        for (std::size_t t = 0; t < alpha; ++t) {
          const SymbolId& id_t = table.symbol_id(j, t);
          const Symbol& y = payloads[j].symbols[t];
          bool ok;
          if (id_s == id_t) {
            ok = x == y;
          } else {
            ok = field.dot(x, y) == trusted.lookup(id_s, id_t);
          }
          table.set(i, j, s, t, ok ? CellMark::Match : CellMark::Mismatch);
        }
      }
    }
  }
  return table;
}

DetectionReport detect_compromised_reconstruction(const ReconstructionBlockTable& table, int b) {
  DetectionReport report;
  std::vector<bool> flagged(table.size(), false);
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.mismatched_blocks(i) > static_cast<std::size_t>(b)) {
      flagged[i] = true;
      report.detected.insert(table.nodes()[i]);
    }
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (std::size_t j = i + 1; j < table.size(); ++j) {
      if (!flagged[i] && !flagged[j] && table.block_mismatched(i, j)) {
        ++report.residual_mismatches;
      }
    }
  }
  report.inconclusive = report.residual_mismatches > 0;
  enforce_budget(report, b);
  return report;
}

namespace {

void require_distinct(std::vector<NodeId> ids, std::string_view what) {
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(ErrorCode::InvalidArgument, "duplicate " + std::string(what) + " ids");
  }
}

}  // namespace

RepairOutcome secure_repair(const PmCode& code, NodeId failed, std::span<const HelperResponse> responses,
                            const HashStore& store) {
  const SystemParams& params = code.params();
  if (responses.size() < static_cast<std::size_t>(params.d)) {
    throw Error(ErrorCode::NotEnoughHelpers, "secure repair contacts " + std::to_string(params.d) +
                                                 " helpers, got " + std::to_string(responses.size()));
  }
  if (responses.size() > static_cast<std::size_t>(params.d)) {
    throw Error(ErrorCode::InvalidArgument, "secure repair contacts exactly " + std::to_string(params.d) +
                                                " helpers, got " + std::to_string(responses.size()));
  }
  std::vector<NodeId> helper_ids;
  std::vector<SymbolId> ids;
  for (const auto& r : responses) {
    if (r.helper == failed) {
      throw Error(ErrorCode::InvalidArgument, "node " + std::to_string(failed) + " cannot help repair itself");
    }
    helper_ids.push_back(r.helper);
    ids.emplace_back(r.helper, failed);
  }
  require_distinct(helper_ids, "helper");

  const TrustedHashes trusted = store.fetch(ids);
  RepairComparisonTable table = build_repair_table(code.field(), failed, responses, trusted);
  DetectionReport report = detect_compromised_repair(table, params.b);
  if (report.inconclusive) {
    throw DetectionError(ErrorCode::InconclusiveDetection,
                         "repair of node " + std::to_string(failed) + " is inconclusive: " +
                             std::to_string(report.residual_mismatches) + " unexplained mismatches",
                         report);
  }

  std::vector<HelperResponse> clean;
  for (const auto& r : responses) {
    if (!report.detected.contains(r.helper)) {
      clean.push_back(r);
    }
  }
  if (clean.size() < static_cast<std::size_t>(params.d_prime)) {
    throw DetectionError(ErrorCode::NotEnoughCleanHelpers,
                         std::to_string(clean.size()) + " clean helpers remain, need " +
                             std::to_string(params.d_prime),
                         report);
  }
  NodeState node = code.repair(failed, clean);

  // Final self-check: the regenerated symbols must agree with the trusted
  // hashes, among themselves and against every clean response.
  std::vector<CrossSymbol> check;
  for (std::size_t s = 0; s < node.symbols.size(); ++s) {
    check.push_back({node.id_at(s), node.symbols[s]});
  }
  for (const auto& r : clean) {
    check.push_back({SymbolId(r.helper, failed), r.value});
  }
  for (std::size_t a = 0; a < check.size(); ++a) {
    for (std::size_t c = a + 1; c < check.size(); ++c) {
      const bool ok = check[a].id == check[c].id
                          ? check[a].value == check[c].value
                          : code.field().dot(check[a].value, check[c].value) == store.hash(check[a].id, check[c].id);
      if (!ok) {
        throw DetectionError(ErrorCode::RepairVerificationFailed,
                             "regenerated node " + std::to_string(failed) + " fails the trusted-hash check on (" +
                                 to_string(check[a].id) + ")x(" + to_string(check[c].id) + ")",
                             report);
      }
    }
  }
  return {std::move(node), std::move(report), std::move(table)};
}

ReconstructionOutcome secure_reconstruct(const PmCode& code, std::span<const NodeState> payloads,
                                         const HashStore& store) {
  const SystemParams& params = code.params();
  if (payloads.size() < static_cast<std::size_t>(params.k)) {
    throw Error(ErrorCode::NotEnoughNodes, "secure reconstruction contacts " + std::to_string(params.k) +
                                               " nodes, got " + std::to_string(payloads.size()));
  }
  if (payloads.size() > static_cast<std::size_t>(params.k)) {
    throw Error(ErrorCode::InvalidArgument, "secure reconstruction contacts exactly " + std::to_string(params.k) +
                                                " nodes, got " + std::to_string(payloads.size()));
  }
  std::vector<NodeId> node_ids;
  std::vector<SymbolId> ids;
  for (const auto& p : payloads) {
    if (p.symbols.size() != static_cast<std::size_t>(params.alpha) || p.partners.size() != p.symbols.size()) {
      throw Error(ErrorCode::WrongSymbolCount, "node " + std::to_string(p.node_id) + " must send " +
                                                   std::to_string(params.alpha) + " symbols");
    }
    node_ids.push_back(p.node_id);
    for (std::size_t s = 0; s < p.symbols.size(); ++s) {
      ids.push_back(p.id_at(s));
    }
  }
  require_distinct(node_ids, "node");

  const TrustedHashes trusted = store.fetch(ids);
  ReconstructionBlockTable table = build_reconstruction_table(code.field(), payloads, trusted);
  DetectionReport report = detect_compromised_reconstruction(table, params.b);
  if (report.inconclusive) {
    throw DetectionError(ErrorCode::InconclusiveDetection,
                         "reconstruction is inconclusive: " + std::to_string(report.residual_mismatches) +
                             " unexplained mismatched blocks",
                         report);
  }

  std::vector<NodeState> clean;
  for (const auto& p : payloads) {
    if (!report.detected.contains(p.node_id)) {
      clean.push_back(p);
    }
  }
  std::sort(clean.begin(), clean.end(), [](const NodeState& a, const NodeState& b) { return a.node_id < b.node_id; });
  if (clean.size() < static_cast<std::size_t>(params.k_prime)) {
    throw DetectionError(ErrorCode::NotEnoughCleanNodes,
                         std::to_string(clean.size()) + " clean nodes remain, need " +
                             std::to_string(params.k_prime),
                         report);
  }
  clean.resize(static_cast<std::size_t>(params.k_prime));
  std::vector<NodeId> used;
  for (const auto& p : clean) {
    used.push_back(p.node_id);
  }
  std::vector<Symbol> file = code.reconstruct(clean);
  return {std::move(file), std::move(report), std::move(used), std::move(table)};
}

}  // namespace pmguard
