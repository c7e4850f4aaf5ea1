#include "lsecbf/version.hpp"

namespace lsecbf {

std::string_view version() { return LSECBF_VERSION; }

}  // namespace lsecbf
