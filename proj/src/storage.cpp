#include "pmguard/storage.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "pmguard/error.hpp"

namespace pmguard {

namespace {

constexpr std::size_t kTrailer = 8;

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedInput, what); }

void require_byte_field(const SystemParams& params) {
  if (params.q < 257) {
    throw Error(ErrorCode::InvalidParams, "file mode needs q >= 257 so every byte is a field element (q=" +
                                              std::to_string(params.q) + ")");
  }
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    malformed(what + ": expected a number, got '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    malformed(what + ": number out of range");
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open " + path.string());
  }
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot write " + path.string());
  }
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw Error(ErrorCode::Io, "write failed for " + path.string());
  }
}

}  // namespace

std::size_t stripe_payload(const SystemParams& params) {
  return static_cast<std::size_t>(params.file_size) * params.v;
}

std::vector<std::vector<Symbol>> bytes_to_stripes(const SystemParams& params, std::span<const std::uint8_t> bytes) {
  require_byte_field(params);
  const std::size_t chunk = stripe_payload(params);
  const std::size_t total = (bytes.size() + kTrailer + chunk - 1) / chunk * chunk;
  std::vector<std::uint8_t> stream(total, 0);
  std::copy(bytes.begin(), bytes.end(), stream.begin());
  std::uint64_t length = bytes.size();
  for (std::size_t i = 0; i < kTrailer; ++i) {
    stream[total - kTrailer + i] = static_cast<std::uint8_t>(length & 0xff);
    length >>= 8;
  }
  std::vector<std::vector<Symbol>> stripes;
  std::size_t pos = 0;
  for (std::size_t s = 0; s < total / chunk; ++s) {
    std::vector<Symbol> stripe;
    for (int t = 0; t < params.file_size; ++t) {
      Symbol x(params.v);
      for (std::size_t c = 0; c < params.v; ++c) {
        x[c] = Element{stream[pos++]};
      }
      stripe.push_back(std::move(x));
    }
    stripes.push_back(std::move(stripe));
  }
  return stripes;
}

std::vector<std::uint8_t> stripes_to_bytes(const SystemParams& params, std::span<const std::vector<Symbol>> stripes) {
  require_byte_field(params);
  std::vector<std::uint8_t> stream;
  stream.reserve(stripes.size() * stripe_payload(params));
  for (const auto& stripe : stripes) {
    if (stripe.size() != static_cast<std::size_t>(params.file_size)) {
      malformed("stripe has " + std::to_string(stripe.size()) + " symbols, expected " +
                std::to_string(params.file_size));
    }
    for (const auto& x : stripe) {
      if (x.size() != params.v) {
        malformed("symbol of the wrong length");
      }
      for (const auto& e : x) {
        if (e.value > 0xff) {
          malformed("element " + std::to_string(e.value) + " is not a byte");
        }
        stream.push_back(static_cast<std::uint8_t>(e.value));
      }
    }
  }
  if (stream.size() < kTrailer) {
    malformed("stream too short for its length trailer");
  }
  std::uint64_t length = 0;
  for (std::size_t i = 0; i < kTrailer; ++i) {
    length |= static_cast<std::uint64_t>(stream[stream.size() - kTrailer + i]) << (8 * i);
  }
  const std::size_t body = stream.size() - kTrailer;
  if (length > body || body - length >= stripe_payload(params)) {
    malformed("length trailer " + std::to_string(length) + " does not fit " + std::to_string(stripes.size()) +
              " stripes");
  }
  for (std::size_t i = length; i < body; ++i) {
    if (stream[i] != 0) {
      malformed("nonzero padding");
    }
  }
  stream.resize(length);
  return stream;
}

void write_manifest(std::ostream& out, const Manifest& m) {
  const auto& p = m.params;
  out << "n=" << p.n << "\nk=" << p.k << "\nd=" << p.d << "\nb=" << p.b << "\nq=" << p.q << "\nv=" << p.v
      << "\nstripes=" << m.stripes << '\n';
}

Manifest read_manifest(std::istream& in) {
  std::map<std::string, std::uint64_t> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      malformed("manifest line without '=': '" + line + "'");
    }
    const std::string key = line.substr(0, eq);
    kv[key] = parse_u64(line.substr(eq + 1), "manifest " + key);
  }
  for (const char* key : {"n", "k", "d", "b", "q", "v", "stripes"}) {
    if (!kv.contains(key)) {
      malformed(std::string("manifest is missing ") + key);
    }
  }
  Manifest m;
  m.params = make_params(static_cast<int>(kv["n"]), static_cast<int>(kv["k"]), static_cast<int>(kv["d"]),
                         static_cast<int>(kv["b"]), kv["q"], static_cast<std::size_t>(kv["v"]));
  m.stripes = static_cast<std::size_t>(kv["stripes"]);
  return m;
}

void write_node_symbols(std::ostream& out, std::span<const NodeState> stripes) {
  std::string line;
  for (const auto& node : stripes) {
    for (std::size_t s = 0; s < node.symbols.size(); ++s) {
      line = std::to_string(node.partners[s]) + '\t';
      bool first = true;
      for (const auto& e : node.symbols[s]) {
        if (!first) line += ' ';
        line += std::to_string(e.value);
        first = false;
      }
      line += '\n';
      out << line;
    }
  }
}

std::vector<NodeState> read_node_symbols(std::istream& in, const Manifest& m, NodeId node) {
  const auto& p = m.params;
  std::vector<NodeState> out;
  std::string line;
  for (std::size_t stripe = 0; stripe < m.stripes; ++stripe) {
    NodeState state;
    state.node_id = node;
    for (int s = 0; s < p.alpha; ++s) {
      if (!std::getline(in, line)) {
        malformed("node " + std::to_string(node) + ": truncated at stripe " + std::to_string(stripe));
      }
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        malformed("node " + std::to_string(node) + ": line without partner id");
      }
      const auto partner = static_cast<NodeId>(parse_u64(line.substr(0, tab), "partner"));
      if (partner < 1 || partner > p.n || partner == node) {
        malformed("node " + std::to_string(node) + ": bad partner " + std::to_string(partner));
      }
      std::istringstream values(line.substr(tab + 1));
      Symbol x(p.v);
      std::string token;
      for (std::size_t c = 0; c < p.v; ++c) {
        if (!(values >> token)) {
          malformed("node " + std::to_string(node) + ": symbol too short");
        }
        const auto value = parse_u64(token, "symbol element");
        if (value >= p.q) {
          malformed("node " + std::to_string(node) + ": element not reduced mod q");
        }
        x[c] = Element{value};
      }
      if (values >> token) {
        malformed("node " + std::to_string(node) + ": symbol too long");
      }
      state.partners.push_back(partner);
      state.symbols.push_back(std::move(x));
    }
    if (!out.empty() && out.front().partners != state.partners) {
      malformed("node " + std::to_string(node) + ": partner list changes between stripes");
    }
    out.push_back(std::move(state));
  }
  if (std::getline(in, line) && !line.empty()) {
    malformed("node " + std::to_string(node) + ": trailing data");
  }
  return out;
}

std::filesystem::path StorageLayout::node_path(NodeId node) const {
  return root_ / ("node_" + std::to_string(node)) / "symbols.txt";
}

void StorageLayout::save_manifest(const Manifest& manifest) const {
  auto out = open_out(manifest_path());
  write_manifest(out, manifest);
  finish(out, manifest_path());
}

Manifest StorageLayout::load_manifest() const {
  auto in = open_in(manifest_path());
  return read_manifest(in);
}

bool StorageLayout::has_node(NodeId node) const { return std::filesystem::exists(node_path(node)); }

void StorageLayout::save_node(NodeId node, std::span<const NodeState> stripes) const {
  const auto path = node_path(node);
  auto out = open_out(path);
  write_node_symbols(out, stripes);
  finish(out, path);
}

std::vector<NodeState> StorageLayout::load_node(NodeId node, const Manifest& manifest) const {
  auto in = open_in(node_path(node));
  return read_node_symbols(in, manifest, node);
}

void StorageLayout::erase_node(NodeId node) const {
  std::error_code ec;
  std::filesystem::remove_all(node_path(node).parent_path(), ec);
  if (ec) {
    throw Error(ErrorCode::Io, "cannot remove node " + std::to_string(node) + ": " + ec.message());
  }
}

void StorageLayout::save_trust(std::span<const HashStore> stores) const {
  auto out = open_out(trust_path());
  for (const auto& s : stores) {
    s.write(out);
  }
  finish(out, trust_path());
}

std::vector<HashStore> StorageLayout::load_trust(const Manifest& manifest) const {
  auto in = open_in(trust_path());
  const auto& p = manifest.params;
  std::vector<HashStore> stores;
  for (std::size_t s = 0; s < manifest.stripes; ++s) {
    HashStore store = HashStore::read(in);
    const auto& h = store.header();
    if (h.n != p.n || h.k_prime != p.k_prime || h.d_prime != p.d_prime || h.q != p.q || h.v != p.v) {
      malformed("trusted store " + std::to_string(s) + " does not match the manifest");
    }
    stores.push_back(std::move(store));
  }
  std::string rest;
  if (std::getline(in, rest) && !rest.empty()) {
    malformed("trailing data after the last trusted store");
  }
  return stores;
}

}  // namespace pmguard
