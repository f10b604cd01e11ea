// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace pumpmap {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kGridMagic = "VGD1";
inline constexpr const char* kFieldMagic = "FMP1";

} // namespace pumpmap
