#pragma once

#include "dlab/vectorspace.hpp"
#include "oracle.hpp"

namespace support {

inline oracle::Seq to_seq(const dlab::ComplexVector& v) {
  oracle::Seq s;
  for (int j = v.window().lo(); j <= v.window().hi(); ++j) {
    if (v[j] != dlab::cplx(0.0)) s[j] = v[j];
  }
  return s;
}

inline dlab::ComplexVector from_seq(const dlab::IndexWindow& w, const oracle::Seq& s) {
  dlab::ComplexVector v(w);
  for (const auto& [j, c] : s) v[j] = c;
  return v;
}

inline std::vector<int> window_indices(const dlab::IndexWindow& w) {
  std::vector<int> out;
  for (int j = w.lo(); j <= w.hi(); ++j) out.push_back(j);
  return out;
}

}  // namespace support
