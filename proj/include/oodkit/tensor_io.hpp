#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oodkit {

enum class DumpKind { kHidden, kLogits };
enum class SplitTag { kTrain, kVal, kTestInd, kTestOod };

std::string_view to_string(DumpKind kind);
std::string_view to_string(SplitTag tag);
DumpKind parse_dump_kind(std::string_view text);
SplitTag parse_split_tag(std::string_view text);

inline constexpr int kUnknownLabel = -1;

struct DumpMeta {
  DumpKind kind = DumpKind::kHidden;
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<int> label_ids;
  std::vector<SplitTag> split_tag;
  std::vector<std::string> class_names;
  std::string backbone_name;
  std::string source_note;
};

/// Row-major n x dim float32 matrix plus its metadata. Hidden-state dumps
/// (EmbeddingSet) and classifier-logit dumps (LogitSet) share this layout and
/// are told apart by meta.kind.
struct Dump {
  DumpMeta meta;
  std::vector<float> data;

  std::size_t rows() const { return meta.n; }
  std::size_t cols() const { return meta.dim; }
  std::span<const float> row(std::size_t i) const {
    return {data.data() + i * meta.dim, meta.dim};
  }
  std::span<float> row(std::size_t i) {
    return {data.data() + i * meta.dim, meta.dim};
  }
};

using EmbeddingSet = Dump;
using LogitSet = Dump;

// Checks every DumpMeta/Dump invariant; throws oodkit::Error on violation.
void validate(const Dump& dump);

// Writes <stem>.json (sorted keys) and <stem>.bin (raw little-endian
// binary32, row-major, no header). Both files go through a temp+rename.
void write_dump(const Dump& dump, const std::filesystem::path& stem);

Dump read_dump(const std::filesystem::path& stem);

// Rows whose split tag is one of `tags`, in original order.
Dump select_rows(const Dump& dump, std::span<const SplitTag> tags);
std::size_t count_rows(const Dump& dump, SplitTag tag);

// Little-endian binary32 codec used by the .bin payload.
std::vector<std::uint8_t> encode_f32le(std::span<const float> values);
std::vector<float> decode_f32le(std::span<const std::uint8_t> bytes);

// Atomic text write (temp file in the same directory, then rename).
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace oodkit
