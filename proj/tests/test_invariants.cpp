#include <gtest/gtest.h>

#include <ostream>
#include <string>

#include "support/invariants.hpp"

namespace {

struct Case {
  std::size_t entry;
  std::uint64_t seed;
};

void PrintTo(const Case& c, std::ostream* os) { *os << inv::all()[c.entry].name << "/seed" << c.seed; }

std::vector<Case> cases() {
  std::vector<Case> c;
  for (std::size_t i = 0; i < inv::all().size(); ++i)
    for (auto s : inv::seeds()) c.push_back({i, s});
  return c;
}

class Invariant : public ::testing::TestWithParam<Case> {};

TEST_P(Invariant, Holds) {
  const auto& e = inv::all()[GetParam().entry];
  const auto r = e.fn(GetParam().seed);
  EXPECT_TRUE(r.ok) << e.module << "/" << e.name << " seed " << GetParam().seed << ": " << r.detail;
}

INSTANTIATE_TEST_SUITE_P(AllSeeds, Invariant, ::testing::ValuesIn(cases()),
                         [](const ::testing::TestParamInfo<Case>& info) {
                           const auto& e = inv::all()[info.param.entry];
                           return std::string(e.module) + "_" + e.name + "_seed" + std::to_string(info.param.seed);
                         });

}  // namespace
