/*
 * Copyright 2026 The skullfx Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Reader and writer for the uncompressed little-endian subset of DICOM used
// by CT slice ingestion. Only explicit-VR and implicit-VR little endian are
// accepted; sequences are skipped without being descended into.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "skullfx/error.hpp"
#include "skullfx/matrix.hpp"

namespace skullfx::dicom {

struct Tag {
  std::uint16_t group = 0;
  std::uint16_t element = 0;

  constexpr auto operator<=>(const Tag&) const = default;
};

inline std::string ToString(Tag tag) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "(%04X,%04X)", tag.group, tag.element);
  return buf;
}

namespace tags {
inline constexpr Tag kMetaGroupLength{0x0002, 0x0000};
inline constexpr Tag kTransferSyntaxUid{0x0002, 0x0010};
inline constexpr Tag kSliceThickness{0x0018, 0x0050};
inline constexpr Tag kPatientId{0x0010, 0x0020};
inline constexpr Tag kInstanceNumber{0x0020, 0x0013};
inline constexpr Tag kRows{0x0028, 0x0010};
inline constexpr Tag kColumns{0x0028, 0x0011};
inline constexpr Tag kBitsAllocated{0x0028, 0x0100};
inline constexpr Tag kBitsStored{0x0028, 0x0101};
inline constexpr Tag kPixelRepresentation{0x0028, 0x0103};
inline constexpr Tag kRescaleIntercept{0x0028, 0x1052};
inline constexpr Tag kRescaleSlope{0x0028, 0x1053};
inline constexpr Tag kPixelData{0x7FE0, 0x0010};
inline constexpr Tag kItem{0xFFFE, 0xE000};
inline constexpr Tag kItemDelimitation{0xFFFE, 0xE00D};
inline constexpr Tag kSequenceDelimitation{0xFFFE, 0xE0DD};
}  // namespace tags

inline constexpr std::string_view kExplicitVrLittleEndian = "1.2.840.10008.1.2.1";
inline constexpr std::string_view kImplicitVrLittleEndian = "1.2.840.10008.1.2";

enum class TransferSyntax { kExplicitVrLittleEndian, kImplicitVrLittleEndian };

struct DicomElement {
  Tag tag;
  // Empty when the element was read from an implicit-VR dataset.
  std::string vr;
  std::vector<std::uint8_t> value;

  bool operator==(const DicomElement&) const = default;
};

using ElementMap = std::map<Tag, DicomElement>;

struct CtSlice {
  std::string patient_id = "UNKNOWN";
  std::int32_t instance_number = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint16_t bits_allocated = 16;
  std::uint16_t bits_stored = 16;
  std::uint16_t pixel_representation = 0;
  double rescale_slope = 1.0;
  double rescale_intercept = 0.0;
  double slice_thickness_mm = 1.0;
  Matrix<std::int32_t> pixels;
  // File the slice was read from; empty for in-memory slices.
  std::string source_path;
};

namespace detail {

inline bool HasLongLength(std::string_view vr) {
  static constexpr std::array<std::string_view, 13> kLong = {
      "OB", "OD", "OF", "OL", "OV", "OW", "SQ", "SV", "UC", "UN", "UR", "UT", "UV"};
  return std::find(kLong.begin(), kLong.end(), vr) != kLong.end();
}

inline bool IsKnownVr(std::string_view vr) {
  static constexpr std::array<std::string_view, 34> kVrs = {
      "AE", "AS", "AT", "CS", "DA", "DS", "DT", "FD", "FL", "IS", "LO", "LT",
      "OB", "OD", "OF", "OL", "OV", "OW", "PN", "SH", "SL", "SQ", "SS", "ST",
      "SV", "TM", "UC", "UI", "UL", "UN", "UR", "US", "UT", "UV"};
  return std::find(kVrs.begin(), kVrs.end(), vr) != kVrs.end();
}

inline bool IsStringVr(std::string_view vr) {
  static constexpr std::array<std::string_view, 16> kStrings = {
      "AE", "AS", "CS", "DA", "DS", "DT", "IS", "LO", "LT", "PN", "SH", "ST",
      "TM", "UC", "UI", "UT"};
  return std::find(kStrings.begin(), kStrings.end(), vr) != kStrings.end();
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes, std::size_t pos = 0)
      : bytes_(bytes), pos_(pos) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool at_end() const { return pos_ >= bytes_.size(); }

  void Require(std::size_t n) const {
    if (remaining() < n) {
      Fail(ErrorCode::kTruncatedFile,
           "need " + std::to_string(n) + " bytes at offset " +
               std::to_string(pos_) + ", " + std::to_string(remaining()) +
               " remain");
    }
  }
  std::uint16_t U16() {
    Require(2);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t U32() {
    Require(4);
    std::uint32_t v = static_cast<std::uint32_t>(bytes_[pos_]) |
                      (static_cast<std::uint32_t>(bytes_[pos_ + 1]) << 8) |
                      (static_cast<std::uint32_t>(bytes_[pos_ + 2]) << 16) |
                      (static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24);
    pos_ += 4;
    return v;
  }
  Tag PeekTag() const {
    Require(4);
    return Tag{static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8)),
               static_cast<std::uint16_t>(bytes_[pos_ + 2] | (bytes_[pos_ + 3] << 8))};
  }
  Tag ReadTag() {
    Tag t = PeekTag();
    pos_ += 4;
    return t;
  }
  std::string Chars(std::size_t n) {
    Require(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::vector<std::uint8_t> Bytes(std::size_t n) {
    Require(n);
    std::vector<std::uint8_t> v(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return v;
  }
  void Skip(std::size_t n) {
    Require(n);
    pos_ += n;
  }
  std::span<const std::uint8_t> bytes() const { return bytes_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

inline constexpr std::uint32_t kUndefinedLength = 0xFFFFFFFFu;

struct RawHeader {
  Tag tag;
  std::string vr;
  std::uint32_t length = 0;
};

inline RawHeader ReadHeader(ByteReader& in, bool explicit_vr) {
  RawHeader h;
  h.tag = in.ReadTag();
  // Item and delimiter tags never carry a VR.
  if (h.tag.group == 0xFFFE || !explicit_vr) {
    h.length = in.U32();
    return h;
  }
  h.vr = in.Chars(2);
  if (HasLongLength(h.vr)) {
    in.Skip(2);
    h.length = in.U32();
  } else {
    h.length = in.U16();
  }
  return h;
}

void SkipUndefinedSequence(ByteReader& in, bool explicit_vr);

// Skips data elements until an item delimiter is consumed.
inline void SkipUndefinedItem(ByteReader& in, bool explicit_vr) {
  for (;;) {
    RawHeader h = ReadHeader(in, explicit_vr);
    if (h.tag == tags::kItemDelimitation) return;
    if (h.length == kUndefinedLength) {
      SkipUndefinedSequence(in, explicit_vr);
    } else {
      in.Skip(h.length);
    }
  }
}

inline void SkipUndefinedSequence(ByteReader& in, bool explicit_vr) {
  for (;;) {
    RawHeader h = ReadHeader(in, true);  // item tags carry no VR either way
    if (h.tag == tags::kSequenceDelimitation) return;
    if (h.tag != tags::kItem) {
      Fail(ErrorCode::kTruncatedFile,
           "malformed sequence item " + ToString(h.tag));
    }
    if (h.length == kUndefinedLength) {
      SkipUndefinedItem(in, explicit_vr);
    } else {
      in.Skip(h.length);
    }
  }
}

inline std::string TrimValue(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\0')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\0')) --e;
  return std::string(s.substr(b, e - b));
}

// Dataset (non-meta) encoding guess for files without a meta header: an
// explicit-VR element carries two uppercase VR letters after its tag.
inline bool LooksExplicit(const ByteReader& in) {
  auto b = in.bytes();
  std::size_t p = in.pos();
  if (p + 6 > b.size()) return false;
  std::string_view vr(reinterpret_cast<const char*>(b.data() + p + 4), 2);
  return IsKnownVr(vr);
}

inline bool IsPlausibleStartTag(Tag t) {
  return t.group == 0x0002 || t.group == 0x0008;
}

}  // namespace detail

// Parses a file image into its element map. Elements after Pixel Data are
// ignored; a stream ending before Pixel Data is reported as truncated.
inline ElementMap ParseDicom(std::span<const std::uint8_t> bytes) {
  static constexpr std::string_view kMagic = "DICM";
  std::size_t start = 0;
  const bool has_magic =
      bytes.size() >= 132 &&
      std::memcmp(bytes.data() + 128, kMagic.data(), kMagic.size()) == 0;
  if (has_magic) {
    start = 132;
  } else {
    detail::ByteReader probe(bytes);
    const bool fallback =
        bytes.size() >= 4 && detail::IsPlausibleStartTag(probe.PeekTag());
    if (!fallback) {
      if (bytes.size() < 132) {
        const std::size_t tail = bytes.size() > 128 ? bytes.size() - 128 : 0;
        if (tail == 0 || std::memcmp(bytes.data() + 128, kMagic.data(), tail) == 0) {
          Fail(ErrorCode::kTruncatedFile,
               "file ends inside the preamble (" + std::to_string(bytes.size()) +
                   " bytes)");
        }
      }
      Fail(ErrorCode::kMissingMagic, "no DICM marker and no recognizable leading tag");
    }
  }

  detail::ByteReader in(bytes, start);
  ElementMap out;
  std::optional<bool> dataset_explicit;

  while (true) {
    if (in.at_end()) {
      Fail(ErrorCode::kTruncatedFile, "stream ended before Pixel Data");
    }
    const Tag next = in.PeekTag();
    bool explicit_vr = true;
    if (next.group != 0x0002) {
      if (!dataset_explicit) {
        auto ts = out.find(tags::kTransferSyntaxUid);
        if (ts == out.end()) {
          dataset_explicit = detail::LooksExplicit(in);
        } else {
          std::string uid = detail::TrimValue(std::string_view(
              reinterpret_cast<const char*>(ts->second.value.data()),
              ts->second.value.size()));
          if (uid == kExplicitVrLittleEndian) {
            dataset_explicit = true;
          } else if (uid == kImplicitVrLittleEndian) {
            dataset_explicit = false;
          } else {
            Fail(ErrorCode::kUnsupportedTransferSyntax, uid);
          }
        }
      }
      explicit_vr = *dataset_explicit;
    }

    detail::RawHeader h = detail::ReadHeader(in, explicit_vr);
    if (h.length == detail::kUndefinedLength) {
      if (h.tag == tags::kPixelData) {
        Fail(ErrorCode::kUnsupportedTransferSyntax, "encapsulated pixel data");
      }
      detail::SkipUndefinedSequence(in, explicit_vr);
      continue;
    }
    if (h.vr == "SQ") {
      in.Skip(h.length);
      continue;
    }
    DicomElement el{h.tag, h.vr, in.Bytes(h.length)};
    out.insert_or_assign(h.tag, std::move(el));
    if (h.tag == tags::kPixelData) break;
  }
  return out;
}

namespace detail {

inline void PutU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

// VRs for the handful of tags this library writes or reads by number.
inline std::string DefaultVr(Tag t) {
  static const std::map<Tag, std::string> kDict = {
      {{0x0002, 0x0000}, "UL"}, {{0x0002, 0x0001}, "OB"}, {{0x0002, 0x0002}, "UI"},
      {{0x0002, 0x0003}, "UI"}, {{0x0002, 0x0010}, "UI"}, {{0x0002, 0x0012}, "UI"},
      {{0x0008, 0x0016}, "UI"}, {{0x0008, 0x0018}, "UI"}, {{0x0008, 0x0060}, "CS"},
      {{0x0010, 0x0020}, "LO"}, {{0x0018, 0x0050}, "DS"}, {{0x0020, 0x0013}, "IS"},
      {{0x0028, 0x0002}, "US"}, {{0x0028, 0x0010}, "US"}, {{0x0028, 0x0011}, "US"},
      {{0x0028, 0x0100}, "US"}, {{0x0028, 0x0101}, "US"}, {{0x0028, 0x0102}, "US"},
      {{0x0028, 0x0103}, "US"}, {{0x0028, 0x1052}, "DS"}, {{0x0028, 0x1053}, "DS"},
      {{0x7FE0, 0x0010}, "OW"}};
  auto it = kDict.find(t);
  return it == kDict.end() ? "UN" : it->second;
}

inline void WriteElement(std::vector<std::uint8_t>& out, const DicomElement& el,
                         bool explicit_vr) {
  PutU16(out, el.tag.group);
  PutU16(out, el.tag.element);
  const auto len = static_cast<std::uint32_t>(el.value.size());
  if (explicit_vr) {
    std::string vr = el.vr.empty() ? DefaultVr(el.tag) : el.vr;
    out.push_back(static_cast<std::uint8_t>(vr[0]));
    out.push_back(static_cast<std::uint8_t>(vr[1]));
    if (HasLongLength(vr)) {
      PutU16(out, 0);
      PutU32(out, len);
    } else {
      PutU16(out, static_cast<std::uint16_t>(len));
    }
  } else {
    PutU32(out, len);
  }
  out.insert(out.end(), el.value.begin(), el.value.end());
}

}  // namespace detail

// Serializes an element map with a 128-byte preamble, "DICM" marker and a
// file meta group. The meta group length and transfer syntax UID are always
// regenerated to match `syntax`; every other element payload is written
// verbatim.
inline std::vector<std::uint8_t> WriteDicom(const ElementMap& elements,
                                            TransferSyntax syntax) {
  std::vector<std::uint8_t> out(132, 0);
  std::memcpy(out.data() + 128, "DICM", 4);

  ElementMap meta;
  for (const auto& [tag, el] : elements) {
    if (tag.group == 0x0002 && tag != tags::kMetaGroupLength) meta.emplace(tag, el);
  }
  std::string uid(syntax == TransferSyntax::kExplicitVrLittleEndian
                      ? kExplicitVrLittleEndian
                      : kImplicitVrLittleEndian);
  if (uid.size() % 2) uid.push_back('\0');
  meta.insert_or_assign(tags::kTransferSyntaxUid,
                        DicomElement{tags::kTransferSyntaxUid, "UI",
                                     std::vector<std::uint8_t>(uid.begin(), uid.end())});

  std::vector<std::uint8_t> meta_bytes;
  for (const auto& [tag, el] : meta) detail::WriteElement(meta_bytes, el, true);
  std::vector<std::uint8_t> group_len;
  detail::PutU32(group_len, static_cast<std::uint32_t>(meta_bytes.size()));
  detail::WriteElement(out, DicomElement{tags::kMetaGroupLength, "UL", group_len}, true);
  out.insert(out.end(), meta_bytes.begin(), meta_bytes.end());

  const bool explicit_vr = syntax == TransferSyntax::kExplicitVrLittleEndian;
  for (const auto& [tag, el] : elements) {
    if (tag.group == 0x0002) continue;
    detail::WriteElement(out, el, explicit_vr);
  }
  return out;
}

// Value helpers -------------------------------------------------------------

inline std::string ElementString(const DicomElement& el) {
  return detail::TrimValue(std::string_view(
      reinterpret_cast<const char*>(el.value.data()), el.value.size()));
}

// Decimal/integer strings may be multi-valued ("a\b"); the first value wins.
inline double ElementDecimal(const DicomElement& el) {
  std::string s = ElementString(el);
  s = detail::TrimValue(s.substr(0, s.find('\\')));
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    Fail(ErrorCode::kMalformedValue,
         "bad decimal string '" + s + "' in " + ToString(el.tag));
  }
  return v;
}

inline std::uint16_t ElementU16(const DicomElement& el) {
  if (el.value.size() < 2) {
    Fail(ErrorCode::kTruncatedFile, "short US value in " + ToString(el.tag));
  }
  return static_cast<std::uint16_t>(el.value[0] | (el.value[1] << 8));
}

inline DicomElement MakeStringElement(Tag tag, std::string vr, std::string text) {
  if (text.size() % 2) text.push_back(vr == "UI" ? '\0' : ' ');
  return DicomElement{tag, std::move(vr), std::vector<std::uint8_t>(text.begin(), text.end())};
}

inline DicomElement MakeU16Element(Tag tag, std::uint16_t v) {
  return DicomElement{tag, "US", {static_cast<std::uint8_t>(v & 0xFF),
                                  static_cast<std::uint8_t>(v >> 8)}};
}

// Decodes stored values with `bits_stored` significant bits, sign-extending
// from the top stored bit when the representation is two's complement.
inline std::int32_t DecodeStoredValue(std::uint32_t word, std::uint16_t bits_stored,
                                      std::uint16_t pixel_representation) {
  const std::uint32_t mask =
      bits_stored >= 32 ? 0xFFFFFFFFu : ((1u << bits_stored) - 1u);
  word &= mask;
  if (pixel_representation == 1 && bits_stored > 0 && (word >> (bits_stored - 1)) & 1u) {
    return static_cast<std::int32_t>(static_cast<std::int64_t>(word) -
                                     (static_cast<std::int64_t>(1) << bits_stored));
  }
  return static_cast<std::int32_t>(word);
}

inline CtSlice ExtractCtSlice(const ElementMap& elements) {
  auto require = [&](Tag t) -> const DicomElement& {
    auto it = elements.find(t);
    if (it == elements.end()) Fail(ErrorCode::kMissingRequiredTag, ToString(t));
    return it->second;
  };
  CtSlice s;
  s.rows = ElementU16(require(tags::kRows));
  s.cols = ElementU16(require(tags::kColumns));
  s.bits_allocated = ElementU16(require(tags::kBitsAllocated));
  s.bits_stored = ElementU16(require(tags::kBitsStored));
  s.pixel_representation = ElementU16(require(tags::kPixelRepresentation));
  s.rescale_intercept = ElementDecimal(require(tags::kRescaleIntercept));
  s.rescale_slope = ElementDecimal(require(tags::kRescaleSlope));
  const DicomElement& pixel_data = require(tags::kPixelData);

  if (auto it = elements.find(tags::kPatientId); it != elements.end()) {
    std::string id = ElementString(it->second);
    if (!id.empty()) s.patient_id = id;
  }
  if (auto it = elements.find(tags::kInstanceNumber); it != elements.end()) {
    s.instance_number = static_cast<std::int32_t>(ElementDecimal(it->second));
  }
  if (auto it = elements.find(tags::kSliceThickness); it != elements.end()) {
    s.slice_thickness_mm = ElementDecimal(it->second);
  }

  if (s.rows == 0 || s.cols == 0) {
    Fail(ErrorCode::kPixelDataSizeMismatch, "zero image dimension");
  }
  if ((s.bits_allocated != 8 && s.bits_allocated != 16) ||
      s.bits_stored == 0 || s.bits_stored > s.bits_allocated) {
    Fail(ErrorCode::kPixelDataSizeMismatch,
         "unsupported bit layout allocated=" + std::to_string(s.bits_allocated) +
             " stored=" + std::to_string(s.bits_stored));
  }
  const std::size_t bytes_per = s.bits_allocated / 8;
  const std::size_t expected = std::size_t{s.rows} * s.cols * bytes_per;
  if (pixel_data.value.size() != expected) {
    Fail(ErrorCode::kPixelDataSizeMismatch,
         "expected " + std::to_string(expected) + " bytes, found " +
             std::to_string(pixel_data.value.size()));
  }
  s.pixels = Matrix<std::int32_t>(s.rows, s.cols);
  const auto& raw = pixel_data.value;
  for (std::size_t i = 0; i < std::size_t{s.rows} * s.cols; ++i) {
    std::uint32_t word = raw[i * bytes_per];
    if (bytes_per == 2) word |= static_cast<std::uint32_t>(raw[i * bytes_per + 1]) << 8;
    s.pixels.data()[i] = DecodeStoredValue(word, s.bits_stored, s.pixel_representation);
  }
  return s;
}

// Builds the element map for a slice (16-bit pixels). Used by fixture
// generators and the ingest tooling.
inline ElementMap SliceToElements(const CtSlice& s) {
  auto ds = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
  };
  ElementMap m;
  auto put = [&](DicomElement el) { m.insert_or_assign(el.tag, std::move(el)); };
  put(MakeStringElement({0x0002, 0x0002}, "UI", "1.2.840.10008.5.1.4.1.1.2"));
  put(MakeStringElement({0x0008, 0x0060}, "CS", "CT"));
  put(MakeStringElement(tags::kPatientId, "LO", s.patient_id));
  put(MakeStringElement(tags::kSliceThickness, "DS", ds(s.slice_thickness_mm)));
  put(MakeStringElement(tags::kInstanceNumber, "IS", std::to_string(s.instance_number)));
  put(MakeU16Element({0x0028, 0x0002}, 1));
  put(MakeU16Element(tags::kRows, static_cast<std::uint16_t>(s.rows)));
  put(MakeU16Element(tags::kColumns, static_cast<std::uint16_t>(s.cols)));
  put(MakeU16Element(tags::kBitsAllocated, 16));
  put(MakeU16Element(tags::kBitsStored, s.bits_stored));
  put(MakeU16Element({0x0028, 0x0102}, static_cast<std::uint16_t>(s.bits_stored - 1)));
  put(MakeU16Element(tags::kPixelRepresentation, s.pixel_representation));
  put(MakeStringElement(tags::kRescaleIntercept, "DS", ds(s.rescale_intercept)));
  put(MakeStringElement(tags::kRescaleSlope, "DS", ds(s.rescale_slope)));
  std::vector<std::uint8_t> px;
  px.reserve(s.pixels.size() * 2);
  for (std::int32_t v : s.pixels.data()) {
    const auto w = static_cast<std::uint16_t>(static_cast<std::uint32_t>(v) & 0xFFFFu);
    detail::PutU16(px, w);
  }
  put(DicomElement{tags::kPixelData, "OW", std::move(px)});
  return m;
}

inline std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

struct SeriesScan {
  // Ordered by patient id, then instance number, then source path.
  std::vector<CtSlice> slices;
  std::vector<std::string> warnings;
};

// Reads every regular file under `root` (or only the files listed in
// `allowlist`, one path relative to `root` per line) and keeps slices whose
// thickness is within 0.01 mm of `thickness_filter_mm`.
inline SeriesScan ScanSeries(const std::filesystem::path& root, double thickness_filter_mm,
                             const std::optional<std::filesystem::path>& allowlist = {}) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) Fail(ErrorCode::kIo, "not a directory: " + root.string());

  std::vector<fs::path> files;
  if (allowlist) {
    std::ifstream in(*allowlist);
    if (!in) Fail(ErrorCode::kIo, "cannot open allowlist " + allowlist->string());
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      line = detail::TrimValue(line);
      if (!line.empty()) files.push_back(root / line);
    }
  } else {
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
  }

  SeriesScan scan;
  for (const auto& file : files) {
    try {
      auto bytes = ReadFileBytes(file);
      CtSlice slice = ExtractCtSlice(ParseDicom(bytes));
      if (std::abs(slice.slice_thickness_mm - thickness_filter_mm) >= 0.01) continue;
      slice.source_path = fs::relative(file, root).generic_string();
      scan.slices.push_back(std::move(slice));
    } catch (const Error& e) {
      scan.warnings.push_back(file.generic_string() + ": " + e.what());
    }
  }
  if (scan.slices.empty()) {
    Fail(ErrorCode::kEmptySeries, "no slices of thickness " +
                                      std::to_string(thickness_filter_mm) +
                                      " mm under " + root.string());
  }
  std::sort(scan.slices.begin(), scan.slices.end(), [](const CtSlice& a, const CtSlice& b) {
    return std::tie(a.patient_id, a.instance_number, a.source_path) <
           std::tie(b.patient_id, b.instance_number, b.source_path);
  });
  return scan;
}

}  // namespace skullfx::dicom
