#include "donormag/version.hpp"

namespace donormag {

std::string_view version() { return DONORMAG_VERSION; }

}  // namespace donormag
