#pragma once

#include <string_view>

namespace lsecbf {

std::string_view version();

}  // namespace lsecbf
