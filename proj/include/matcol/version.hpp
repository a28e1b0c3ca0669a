#pragma once

namespace matcol {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace matcol
