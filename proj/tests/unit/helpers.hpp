#pragma once

#include <gtest/gtest.h>

#include "faultloc/error.hpp"

// Runs `stmt`, expects a faultloc::Error of `kind`; `msg` receives the message.
#define EXPECT_FAULT(stmt, expected_kind)                                        \
  do {                                                                           \
    try {                                                                        \
      stmt;                                                                      \
      ADD_FAILURE() << "expected " << ::faultloc::to_string(expected_kind);      \
    } catch (const ::faultloc::Error& e_) {                                      \
      EXPECT_EQ(e_.kind(), expected_kind) << e_.what();                          \
    }                                                                            \
  } while (0)

namespace faultloc::testing {

template <typename F>
std::string error_message(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace faultloc::testing
