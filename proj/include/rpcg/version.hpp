#pragma once

namespace rpcg {

inline constexpr const char* version = "0.1.0";

}  // namespace rpcg
