#include "oodkit/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "oodkit/error.hpp"

namespace oodkit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::string_view kDtype = "f32le";

fs::path with_suffix(const fs::path& stem, std::string_view suffix) {
  return fs::path(stem.string() + std::string(suffix));
}

json meta_to_json(const DumpMeta& meta) {
  json tags = json::array();
  for (SplitTag t : meta.split_tag) tags.push_back(std::string(to_string(t)));
  json j;
  j["kind"] = std::string(to_string(meta.kind));
  j["n"] = meta.n;
  j["dim"] = meta.dim;
  j["dtype"] = std::string(kDtype);
  j["label_ids"] = meta.label_ids;
  j["split_tag"] = std::move(tags);
  j["class_names"] = meta.class_names;
  j["backbone_name"] = meta.backbone_name;
  j["source_note"] = meta.source_note;
  return j;
}

DumpMeta meta_from_json(const json& j) {
  DumpMeta meta;
  try {
    if (!j.is_object()) throw Error("malformed_meta", "meta is not a JSON object");
    if (j.at("dtype").get<std::string>() != kDtype) {
      throw Error("malformed_meta", "unsupported dtype " + j.at("dtype").dump());
    }
    meta.kind = parse_dump_kind(j.at("kind").get<std::string>());
    const auto n = j.at("n").get<std::int64_t>();
    const auto dim = j.at("dim").get<std::int64_t>();
    if (n <= 0 || dim <= 0) throw Error("malformed_meta", "n and dim must be positive");
    meta.n = static_cast<std::size_t>(n);
    meta.dim = static_cast<std::size_t>(dim);
    meta.label_ids = j.at("label_ids").get<std::vector<int>>();
    for (const auto& t : j.at("split_tag")) {
      meta.split_tag.push_back(parse_split_tag(t.get<std::string>()));
    }
    meta.class_names = j.at("class_names").get<std::vector<std::string>>();
    meta.backbone_name = j.value("backbone_name", std::string());
    meta.source_note = j.value("source_note", std::string());
  } catch (const json::exception& e) {
    throw Error("malformed_meta", std::string("meta: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == "malformed_meta") throw;
    throw Error("malformed_meta", e.what());
  }
  return meta;
}

}  // namespace

std::string_view to_string(DumpKind kind) {
  return kind == DumpKind::kHidden ? "hidden" : "logits";
}

std::string_view to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::kTrain: return "train";
    case SplitTag::kVal: return "val";
    case SplitTag::kTestInd: return "test_ind";
    case SplitTag::kTestOod: return "test_ood";
  }
  return "?";
}

DumpKind parse_dump_kind(std::string_view text) {
  if (text == "hidden") return DumpKind::kHidden;
  if (text == "logits") return DumpKind::kLogits;
  throw Error("invalid_argument", "unknown dump kind '" + std::string(text) + "'");
}

SplitTag parse_split_tag(std::string_view text) {
  if (text == "train") return SplitTag::kTrain;
  if (text == "val") return SplitTag::kVal;
  if (text == "test_ind") return SplitTag::kTestInd;
  if (text == "test_ood") return SplitTag::kTestOod;
  throw Error("invalid_argument", "unknown split tag '" + std::string(text) + "'");
}

void validate(const Dump& dump) {
  const DumpMeta& m = dump.meta;
  if (m.n == 0 || m.dim == 0) throw Error("invalid_dump", "n and dim must be positive");
  if (m.label_ids.size() != m.n) {
    throw Error("invalid_dump", "label_ids has " + std::to_string(m.label_ids.size()) +
                                    " entries, expected n=" + std::to_string(m.n));
  }
  if (m.split_tag.size() != m.n) {
    throw Error("invalid_dump", "split_tag has " + std::to_string(m.split_tag.size()) +
                                    " entries, expected n=" + std::to_string(m.n));
  }
  const auto k = static_cast<int>(m.class_names.size());
  for (std::size_t i = 0; i < m.n; ++i) {
    const int label = m.label_ids[i];
    if (label != kUnknownLabel && (label < 0 || label >= k)) {
      throw Error("invalid_dump", "row " + std::to_string(i) + " has label " +
                                      std::to_string(label) + " outside [0, " +
                                      std::to_string(k) + ")");
    }
  }
  if (m.kind == DumpKind::kLogits && m.dim != m.class_names.size()) {
    throw Error("invalid_dump", "logit dump has dim=" + std::to_string(m.dim) + " but " +
                                    std::to_string(m.class_names.size()) + " class names");
  }
  if (dump.data.size() != m.n * m.dim) {
    throw Error("size_mismatch", "data holds " + std::to_string(dump.data.size()) +
                                     " values, expected " + std::to_string(m.n * m.dim));
  }
  for (std::size_t i = 0; i < dump.data.size(); ++i) {
    if (!std::isfinite(dump.data[i])) {
      throw Error("non_finite", "non-finite value at row " + std::to_string(i / m.dim) +
                                    ", column " + std::to_string(i % m.dim));
    }
  }
}

std::vector<std::uint8_t> encode_f32le(std::span<const float> values) {
  std::vector<std::uint8_t> out;
  out.reserve(values.size() * 4);
  for (float v : values) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    out.push_back(static_cast<std::uint8_t>(bits));
    out.push_back(static_cast<std::uint8_t>(bits >> 8));
    out.push_back(static_cast<std::uint8_t>(bits >> 16));
    out.push_back(static_cast<std::uint8_t>(bits >> 24));
  }
  return out;
}

std::vector<float> decode_f32le(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 4 != 0) {
    throw Error("size_mismatch", "payload length is not a multiple of 4");
  }
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint8_t* b = bytes.data() + 4 * i;
    const std::uint32_t bits = std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) |
                               (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 24);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  const fs::path tmp = with_suffix(path, ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error("io", "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("io", "cannot rename into '" + path.string() + "'");
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_dump(const Dump& dump, const fs::path& stem) {
  validate(dump);
  const auto bytes = encode_f32le(dump.data);
  write_file_atomic(with_suffix(stem, ".bin"),
                    std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  write_file_atomic(with_suffix(stem, ".json"), meta_to_json(dump.meta).dump(2) + "\n");
}

Dump read_dump(const fs::path& stem) {
  const fs::path meta_path = with_suffix(stem, ".json");
  const fs::path bin_path = with_suffix(stem, ".bin");
  json j;
  try {
    j = json::parse(read_file(meta_path));
  } catch (const json::exception& e) {
    throw Error("malformed_meta", meta_path.string() + ": " + e.what());
  }
  Dump dump;
  dump.meta = meta_from_json(j);

  const std::string payload = read_file(bin_path);
  const std::size_t expected = 4 * dump.meta.n * dump.meta.dim;
  if (payload.size() != expected) {
    throw Error("size_mismatch", bin_path.string() + " has " + std::to_string(payload.size()) +
                                     " bytes, meta requires " + std::to_string(expected));
  }
  dump.data = decode_f32le(std::span(reinterpret_cast<const std::uint8_t*>(payload.data()),
                                     payload.size()));
  validate(dump);
  return dump;
}

Dump select_rows(const Dump& dump, std::span<const SplitTag> tags) {
  Dump out;
  out.meta = dump.meta;
  out.meta.label_ids.clear();
  out.meta.split_tag.clear();
  out.meta.n = 0;
  for (std::size_t i = 0; i < dump.rows(); ++i) {
    const SplitTag t = dump.meta.split_tag[i];
    if (std::find(tags.begin(), tags.end(), t) == tags.end()) continue;
    out.meta.label_ids.push_back(dump.meta.label_ids[i]);
    out.meta.split_tag.push_back(t);
    const auto r = dump.row(i);
    out.data.insert(out.data.end(), r.begin(), r.end());
    ++out.meta.n;
  }
  return out;
}

std::size_t count_rows(const Dump& dump, SplitTag tag) {
  return static_cast<std::size_t>(
      std::count(dump.meta.split_tag.begin(), dump.meta.split_tag.end(), tag));
}

}  // namespace oodkit
