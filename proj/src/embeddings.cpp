#include "gdegan/errors.hpp"
#include "gdegan/protein.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace gdegan {

KeyMismatch::KeyMismatch(std::vector<std::string> missing)
    : Error([&] {
        std::string msg = "no embedding row for residue(s):";
        for (const auto& m : missing) msg += " " + m;
        return msg;
      }()),
      missing_(std::move(missing)) {}

namespace {

constexpr std::size_t kHeaderBytes = 12;
constexpr std::size_t kKeyBytes = 5;

std::uint32_t read_u32(const char* p) {
  std::uint32_t v = 0;
  for (int b = 3; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(p[b]);
  return v;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

}  // namespace

std::optional<std::size_t> EmbeddingTable::find(const ResidueKey& key) const {
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (keys[i] == key) return i;
  return std::nullopt;
}

EmbeddingTable load_embeddings(std::span<const char> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "GDE1", 4) != 0) {
    throw FormatError("missing GDE1 magic");
  }
  if (bytes.size() < kHeaderBytes) throw TruncatedFile("GDE1 header truncated");

  EmbeddingTable t;
  t.n = read_u32(bytes.data() + 4);
  t.d = read_u32(bytes.data() + 8);
  if (t.n == 0) throw EmptyEmbedding("GDE1 file declares zero rows");
  if (t.d == 0) throw EmptyEmbedding("GDE1 file declares zero columns");

  const std::uint64_t expected = kHeaderBytes + std::uint64_t{t.n} * kKeyBytes +
                                 std::uint64_t{t.n} * t.d * sizeof(float);
  if (bytes.size() != expected) {
    throw TruncatedFile("GDE1 size " + std::to_string(bytes.size()) + " does not match declared " +
                        std::to_string(expected));
  }

  const char* p = bytes.data() + kHeaderBytes;
  t.keys.resize(t.n);
  for (std::uint32_t i = 0; i < t.n; ++i, p += kKeyBytes) {
    t.keys[i].chain = p[0];
    t.keys[i].seq = static_cast<std::int32_t>(read_u32(p + 1));
  }
  t.values.resize(std::size_t{t.n} * t.d);
  for (auto& v : t.values) {
    v = std::bit_cast<float>(read_u32(p));
    p += 4;
  }

  auto sorted = t.keys;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw FormatError("duplicate residue key in GDE1 file");
  }
  return t;
}

std::string write_embeddings(const EmbeddingTable& table) {
  if (table.keys.size() != table.n || table.values.size() != std::size_t{table.n} * table.d) {
    throw ShapeError("embedding table sizes inconsistent with header");
  }
  std::string out = "GDE1";
  out.reserve(kHeaderBytes + table.n * (kKeyBytes + table.d * sizeof(float)));
  put_u32(out, table.n);
  put_u32(out, table.d);
  for (const auto& k : table.keys) {
    out.push_back(k.chain);
    put_u32(out, static_cast<std::uint32_t>(k.seq));
  }
  for (float v : table.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

}  // namespace gdegan
