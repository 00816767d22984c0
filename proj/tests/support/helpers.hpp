#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "oracles.hpp"
#include "relhop/model.hpp"
#include "relhop/random.hpp"

namespace testing {

inline std::vector<relhop::Spin> spins(const std::vector<int>& s) {
  return std::vector<relhop::Spin>(s.begin(), s.end());
}

inline std::vector<int> ints(std::span<const relhop::Spin> s) { return std::vector<int>(s.begin(), s.end()); }

inline oracle::Rows rows(const relhop::PatternSet& ps) {
  oracle::Rows out;
  for (std::size_t mu = 0; mu < ps.pattern_count(); ++mu) out.push_back(ints(ps.pattern(mu)));
  return out;
}

inline std::vector<int> random_spins(std::size_t n, relhop::Rng& rng) {
  std::vector<int> s(n);
  for (auto& v : s) v = rng.sign();
  return s;
}

inline oracle::Kind oracle_kind(const relhop::ModelKind& k) {
  switch (k.family()) {
    case relhop::ModelKind::Family::Classical: return oracle::Kind::Classical;
    case relhop::ModelKind::Family::Relativistic: return oracle::Kind::Relativistic;
    case relhop::ModelKind::Family::Truncated: return oracle::Kind::Truncated;
  }
  return oracle::Kind::Classical;
}

inline std::vector<relhop::ModelKind> all_kinds() {
  return {relhop::ModelKind::classical(), relhop::ModelKind::relativistic(), relhop::ModelKind::truncated(2),
          relhop::ModelKind::truncated(4), relhop::ModelKind::truncated(6)};
}

}  // namespace testing
