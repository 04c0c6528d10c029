#include <gtest/gtest.h>

#include <limits>
#include <set>

#include "sphreg/gradcheck.hpp"

using namespace sphreg;

TEST(GradCheck, AllChecksPassOnFewerTrials) {
  GradCheckOptions opt;
  opt.trials = 100;
  const auto results = run_gradient_checks(opt);
  EXPECT_EQ(results.size(), 17u);
  std::set<std::string> names;
  for (const auto& r : results) {
    EXPECT_TRUE(r.passed()) << r.name << " " << r.max_rel_error << " > " << r.tolerance;
    EXPECT_EQ(r.trials, 100u);
    names.insert(r.name);
  }
  EXPECT_EQ(names.size(), results.size());
}

TEST(GradCheck, PassesOnOtherSeeds) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    GradCheckOptions opt;
    opt.trials = 50;
    opt.seed = seed;
    for (const auto& r : run_gradient_checks(opt)) EXPECT_TRUE(r.passed()) << r.name << " seed " << seed;
  }
}

TEST(GradCheck, DeterministicInSeed) {
  GradCheckOptions opt;
  opt.trials = 20;
  const auto a = run_model_gradient_checks(opt), b = run_model_gradient_checks(opt);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].max_rel_error, b[i].max_rel_error);
}

TEST(GradCheck, NanNeverPasses) {
  GradCheckResult r{"x", 1, std::numeric_limits<double>::quiet_NaN(), 1e-6};
  EXPECT_FALSE(r.passed());
}
