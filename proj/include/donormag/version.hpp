#pragma once

#include <string_view>

namespace donormag {

std::string_view version();

}  // namespace donormag
