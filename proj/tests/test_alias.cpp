#include <doctest.h>

#include "aspem/alias.hpp"
#include "test_util.hpp"

using namespace aspem;

TEST_SUITE("alias") {

TEST_CASE("uniform weights draw uniformly") {
  std::vector<double> w{1, 1, 1, 1};
  AliasTable table(w);
  Rng rng = make_rng(101);
  const long long draws = 1'000'000;
  std::vector<long long> counts(4, 0);
  for (long long i = 0; i < draws; ++i) counts[table.sample(rng)]++;
  double sigma = std::sqrt(0.25 * 0.75 * draws);
  for (long long c : counts) CHECK(std::abs(c - draws * 0.25) < 3 * sigma);
}

TEST_CASE("weights 1:3 split 0.25/0.75") {
  std::vector<double> w{1, 3};
  AliasTable table(w);
  Rng rng = make_rng(202);
  const long long draws = 1'000'000;
  long long c0 = 0;
  for (long long i = 0; i < draws; ++i) c0 += table.sample(rng) == 0;
  double sigma = std::sqrt(0.25 * 0.75 * draws);
  CHECK(std::abs(c0 - draws * 0.25) < 3 * sigma);
}

TEST_CASE("invalid weight vectors are rejected") {
  std::vector<double> zeros{0, 0};
  CHECK_THROWS(AliasTable(zeros));
  std::vector<double> empty;
  CHECK_THROWS(AliasTable(empty));
  std::vector<double> negative{1, -1};
  CHECK_THROWS(AliasTable(negative));
}

TEST_CASE("zero-weight entries are never drawn") {
  std::vector<double> w{0, 5, 0, 1};
  AliasTable table(w);
  Rng rng = make_rng(303);
  for (int i = 0; i < 10'000; ++i) {
    std::size_t s = table.sample(rng);
    CHECK((s == 1 || s == 3));
  }
}

TEST_CASE("chi-square fit against normalized weights on random vectors") {
  Rng rng = make_rng(404);
  const long long draws = 1'000'000;
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 2 + uniform_index(rng, 30);
    std::vector<double> w(n);
    double sum = 0;
    for (double& x : w) {
      x = 0.1 + 10.0 * uniform01(rng);
      sum += x;
    }
    AliasTable table(w);
    std::vector<long long> counts(n, 0);
    for (long long i = 0; i < draws; ++i) counts[table.sample(rng)]++;
    std::vector<double> probs(n);
    for (std::size_t i = 0; i < n; ++i) probs[i] = w[i] / sum;
    CHECK(testutil::chi2_gof_ok(counts, probs, draws));
  }
}

}  // TEST_SUITE
