#pragma once

#include <initializer_list>
#include <vector>

#include "doctest.h"
#include "modham/matrix.hpp"

namespace testing {

inline modham::Matrix from_rows(const modham::PrecisionContext& ctx,
                                std::initializer_list<std::initializer_list<long>> rows) {
  modham::Matrix m(ctx, rows.size(), rows.begin()->size());
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (long v : row) m(i, j++) = modham::Real(ctx, v);
    ++i;
  }
  return m;
}

inline void check_close(const modham::Real& got, const modham::Real& want, const modham::Real& tol) {
  INFO("got " << got.to_string(30) << " want " << want.to_string(30) << " tol " << tol.to_string(3));
  CHECK(modham::abs(got - want) <= tol);
}

}  // namespace testing
