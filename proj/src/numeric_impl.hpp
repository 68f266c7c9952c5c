// Internal helpers shared by the core translation units. Not installed.
#ifndef ROMKIT_NUMERIC_IMPL_HPP
#define ROMKIT_NUMERIC_IMPL_HPP

#include "romkit/numeric.hpp"

#include <cstdio>

namespace romkit {

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

}  // namespace romkit

#endif
