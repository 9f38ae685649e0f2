#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>
#include <stdexcept>
#include <vector>

#include "premium_bandit/delay.hpp"
#include "premium_bandit/rng.hpp"

using namespace pbandit;

namespace {

DelayLedger build(const std::vector<int>& taus, int m) {
  DelayLedger ledger(m);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    ledger.record_delay(static_cast<int>(i) + 1, taus[i],
                        1.0 + static_cast<double>(i));
  }
  return ledger;
}

}  // namespace

TEST_CASE("collect returns claims at their visibility time in origin order") {
  DelayLedger ledger = build({2, 2, 1, 0}, 2);
  CHECK(ledger.collect(1).empty());
  CHECK(ledger.collect(2).empty());
  const auto at3 = ledger.collect(3);
  REQUIRE(at3.size() == 1);
  CHECK(at3[0].first == 1);
  CHECK(at3[0].second == 1.0);
  const auto at4 = ledger.collect(4);
  REQUIRE(at4.size() == 3);
  CHECK(at4[0].first == 2);
  CHECK(at4[1].first == 3);
  CHECK(at4[2].first == 4);
  CHECK(at4[2].second == 4.0);
  CHECK(ledger.collect(5).empty());  // queue drained
}

TEST_CASE("observed counts for a staggered schedule") {
  DelayLedger ledger = build({2, 2, 1, 0}, 2);
  const auto n = ledger.observed_counts(4);
  REQUIRE(n.size() == 5);
  CHECK(n[0] == 0);  // N(1)
  CHECK(n[1] == 0);
  CHECK(n[2] == 0);
  CHECK(n[3] == 1);  // only period 1's claim visible before t=4
  CHECK(n[4] == 4);  // N(5): everything visible
}

TEST_CASE("effective delays of the staggered schedule") {
  DelayLedger ledger = build({2, 2, 1, 0}, 2);
  CHECK(ledger.observation_order(4) == std::vector<int>{1, 2, 3, 4});
  const auto eff = ledger.effective_delays(4);
  CHECK(eff == std::vector<int>{0, 1, 2, 2});
  CHECK(std::accumulate(eff.begin(), eff.end(), 0) == 2 + 2 + 1 + 0);
}

TEST_CASE("effective delays of the alternating schedule") {
  DelayLedger ledger = build({1, 0, 1, 0}, 1);
  const auto eff = ledger.effective_delays(4);
  CHECK(eff == std::vector<int>{0, 1, 0, 1});
}

TEST_CASE("zero delays are the identity") {
  DelayLedger ledger = build({0, 0, 0, 0, 0}, 3);
  CHECK(ledger.effective_delays(5) == std::vector<int>{0, 0, 0, 0, 0});
  CHECK(ledger.observation_order(5) == std::vector<int>{1, 2, 3, 4, 5});
}

TEST_CASE("horizon-clamped constant schedule keeps the delay mass") {
  const int horizon = 50;
  const int m = 5;
  DelayLedger ledger(m);
  int total = 0;
  for (int t = 1; t <= horizon; ++t) {
    const int tau = std::min(m, horizon - t);
    total += tau;
    ledger.record_delay(t, tau, 1.0);
  }
  CHECK(total == (horizon - m) * m + m * (m - 1) / 2);  // 235
  const auto eff = ledger.effective_delays(horizon);
  CHECK(std::accumulate(eff.begin(), eff.end(), 0) == total);
}

TEST_CASE("fuzzed schedules satisfy the delay identities") {
  SubStream rng(111, Stream::delay);
  for (int rep = 0; rep < 200; ++rep) {
    const int horizon = 2 + rng.uniform_int(58);
    const int m = rng.uniform_int(8);
    DelayLedger ledger(m);
    int total = 0;
    for (int t = 1; t <= horizon; ++t) {
      const int tau = std::min(rng.uniform_int(m), horizon - t);
      total += tau;
      ledger.record_delay(t, tau, 1.0);
    }
    const auto order = ledger.observation_order(horizon);
    std::vector<bool> seen(static_cast<std::size_t>(horizon) + 1, false);
    for (int origin : order) {
      CHECK(origin >= 1);
      CHECK(origin <= horizon);
      CHECK_FALSE(seen[static_cast<std::size_t>(origin)]);
      seen[static_cast<std::size_t>(origin)] = true;
    }
    const auto eff = ledger.effective_delays(horizon);
    REQUIRE(static_cast<int>(eff.size()) == horizon);
    int eff_total = 0;
    for (int e : eff) {
      CHECK(e >= 0);
      CHECK(e <= 2 * m);
      eff_total += e;
    }
    CHECK(eff_total == total);
  }
}

TEST_CASE("record_delay enforces ordering and the delay cap") {
  DelayLedger ledger(3);
  ledger.record_delay(1, 2, 1.0);
  CHECK_THROWS_AS(ledger.record_delay(3, 0, 1.0), std::logic_error);
  CHECK_THROWS_AS(ledger.record_delay(1, 0, 1.0), std::logic_error);
  CHECK_THROWS_AS(ledger.record_delay(2, 4, 1.0), std::domain_error);
  CHECK_THROWS_AS(ledger.record_delay(2, -1, 1.0), std::domain_error);
  CHECK_NOTHROW(ledger.record_delay(2, 3, 1.0));
}

TEST_CASE("negative capacity is rejected") {
  CHECK_THROWS_AS(DelayLedger{-1}, std::invalid_argument);
}

TEST_CASE("effective delays require a complete horizon") {
  DelayLedger ledger(2);
  ledger.record_delay(1, 0, 1.0);
  ledger.record_delay(2, 2, 1.0);  // visible at 4, after the horizon below
  CHECK_THROWS_AS(ledger.effective_delays(2), std::logic_error);
  CHECK_THROWS_AS(ledger.effective_delays(1), std::logic_error);
}
