#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "pmguard/hashing.hpp"
#include "pmguard/pm_code.hpp"

namespace pmguard {

/// Bytes carried by one stripe: B symbols of v elements, one byte each.
std::size_t stripe_payload(const SystemParams& params);

/// Splits bytes into stripes of B symbols. The byte stream is followed by
/// zero padding and an 8-byte little-endian length, so the trailer ends the
/// last stripe. Needs q >= 257.
std::vector<std::vector<Symbol>> bytes_to_stripes(const SystemParams& params, std::span<const std::uint8_t> bytes);

/// Inverse of bytes_to_stripes. Throws MalformedInput on out-of-range
/// elements, nonzero padding or an impossible length.
std::vector<std::uint8_t> stripes_to_bytes(const SystemParams& params, std::span<const std::vector<Symbol>> stripes);

struct Manifest {
  SystemParams params;
  std::size_t stripes = 0;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

void write_manifest(std::ostream& out, const Manifest& manifest);
Manifest read_manifest(std::istream& in);

/// alpha lines per stripe: "<partner>\t<c1> <c2> ... <cv>".
void write_node_symbols(std::ostream& out, std::span<const NodeState> stripes);
std::vector<NodeState> read_node_symbols(std::istream& in, const Manifest& manifest, NodeId node);

/// <root>/manifest.txt, <root>/node_<i>/symbols.txt, <root>/trust/hashes.txt
class StorageLayout {
 public:
  explicit StorageLayout(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path manifest_path() const { return root_ / "manifest.txt"; }
  std::filesystem::path node_path(NodeId node) const;
  std::filesystem::path trust_path() const { return root_ / "trust" / "hashes.txt"; }

  void save_manifest(const Manifest& manifest) const;
  Manifest load_manifest() const;

  bool has_node(NodeId node) const;
  void save_node(NodeId node, std::span<const NodeState> stripes) const;
  std::vector<NodeState> load_node(NodeId node, const Manifest& manifest) const;
  void erase_node(NodeId node) const;

  /// One store per stripe, concatenated in stripe order.
  void save_trust(std::span<const HashStore> stores) const;
  std::vector<HashStore> load_trust(const Manifest& manifest) const;

 private:
  std::filesystem::path root_;
};

}  // namespace pmguard
