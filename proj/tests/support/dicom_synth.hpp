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

// Test-only DICOM byte synthesizer, written independently of the library's
// writer so round-trip tests compare two separate encoders.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace skullfx::testing {

struct SynthElement {
  std::uint16_t group;
  std::uint16_t element;
  std::string vr;
  std::vector<std::uint8_t> value;
};

inline void Le16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xFF);
  b.push_back(v >> 8);
}
inline void Le32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) b.push_back((v >> s) & 0xFF);
}

inline bool LongForm(const std::string& vr) {
  return vr == "OB" || vr == "OW" || vr == "OF" || vr == "SQ" || vr == "UT" || vr == "UN";
}

inline void Encode(std::vector<std::uint8_t>& b, const SynthElement& e, bool explicit_vr) {
  Le16(b, e.group);
  Le16(b, e.element);
  if (explicit_vr) {
    b.push_back(e.vr[0]);
    b.push_back(e.vr[1]);
    if (LongForm(e.vr)) {
      Le16(b, 0);
      Le32(b, static_cast<std::uint32_t>(e.value.size()));
    } else {
      Le16(b, static_cast<std::uint16_t>(e.value.size()));
    }
  } else {
    Le32(b, static_cast<std::uint32_t>(e.value.size()));
  }
  b.insert(b.end(), e.value.begin(), e.value.end());
}

inline std::vector<std::uint8_t> Text(std::string s, char pad = ' ') {
  if (s.size() % 2) s.push_back(pad);
  return {s.begin(), s.end()};
}
inline std::vector<std::uint8_t> U16(std::uint16_t v) { return {std::uint8_t(v & 0xFF), std::uint8_t(v >> 8)}; }

// Full file: preamble, DICM, meta group (explicit VR), then the dataset in
// the requested encoding.
inline std::vector<std::uint8_t> SynthFile(const std::vector<SynthElement>& dataset, bool explicit_vr) {
  std::vector<std::uint8_t> meta;
  Encode(meta, {0x0002, 0x0010, "UI",
                Text(explicit_vr ? "1.2.840.10008.1.2.1" : "1.2.840.10008.1.2", '\0')},
         true);
  std::vector<std::uint8_t> out(128, 0);
  for (char c : {'D', 'I', 'C', 'M'}) out.push_back(static_cast<std::uint8_t>(c));
  std::vector<std::uint8_t> len;
  Le32(len, static_cast<std::uint32_t>(meta.size()));
  Encode(out, {0x0002, 0x0000, "UL", len}, true);
  out.insert(out.end(), meta.begin(), meta.end());
  for (const auto& e : dataset) Encode(out, e, explicit_vr);
  return out;
}

struct SliceSpec {
  std::string patient = "P001";
  int instance = 1;
  double thickness = 1.0;
  std::uint16_t rows = 2, cols = 2;
  std::uint16_t pixel_representation = 1;
  std::string slope = "1", intercept = "-1024";
  std::vector<std::int16_t> pixels = {0, -1024, 500, 3000};
};

// The tag set ExtractCtSlice needs plus the optional identifiers, sorted.
inline std::vector<SynthElement> SliceElements(const SliceSpec& s) {
  char thick[32];
  std::snprintf(thick, sizeof(thick), "%g", s.thickness);
  std::vector<std::uint8_t> px;
  for (std::int16_t v : s.pixels) Le16(px, static_cast<std::uint16_t>(v));
  return {
      {0x0010, 0x0020, "LO", Text(s.patient)},
      {0x0018, 0x0050, "DS", Text(thick)},
      {0x0020, 0x0013, "IS", Text(std::to_string(s.instance))},
      {0x0028, 0x0010, "US", U16(s.rows)},
      {0x0028, 0x0011, "US", U16(s.cols)},
      {0x0028, 0x0100, "US", U16(16)},
      {0x0028, 0x0101, "US", U16(16)},
      {0x0028, 0x0103, "US", U16(s.pixel_representation)},
      {0x0028, 0x1052, "DS", Text(s.intercept)},
      {0x0028, 0x1053, "DS", Text(s.slope)},
      {0x7FE0, 0x0010, "OW", px},
  };
}

// Random dataset: a sorted run of string/US/OB elements in groups 0008..0028
// followed by pixel data.
inline std::vector<SynthElement> RandomElements(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 12), len(0, 20), byte(0, 255), kind(0, 2);
  std::vector<SynthElement> out;
  std::uint16_t group = 0x0008, element = 0x0010;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    element = static_cast<std::uint16_t>(element + 1 + byte(rng));
    if (byte(rng) < 60) {
      group = static_cast<std::uint16_t>(group + 2);
      element = 0x0010;
    }
    if (group > 0x0028) break;
    SynthElement e{group, element, "", {}};
    switch (kind(rng)) {
      case 0: {
        e.vr = "LO";
        std::string s;
        for (int c = len(rng); c > 0; --c) s.push_back(static_cast<char>('A' + byte(rng) % 26));
        e.value = Text(s);
        break;
      }
      case 1:
        e.vr = "US";
        e.value = U16(static_cast<std::uint16_t>(byte(rng) * 257));
        break;
      default:
        e.vr = "OB";
        for (int c = len(rng) * 2; c > 0; --c) e.value.push_back(static_cast<std::uint8_t>(byte(rng)));
        break;
    }
    out.push_back(std::move(e));
  }
  SynthElement px{0x7FE0, 0x0010, "OW", {}};
  for (int c = (1 + len(rng)) * 2; c > 0; --c) px.value.push_back(static_cast<std::uint8_t>(byte(rng)));
  out.push_back(std::move(px));
  return out;
}

}  // namespace skullfx::testing
