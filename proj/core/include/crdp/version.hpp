#pragma once

#define CRDP_VERSION_MAJOR 0
#define CRDP_VERSION_MINOR 1
#define CRDP_VERSION_PATCH 0

namespace crdp {

inline constexpr const char* version_string = "0.1.0";

}  // namespace crdp
