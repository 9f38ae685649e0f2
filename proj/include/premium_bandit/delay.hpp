#pragma once

#include <map>
#include <utility>
#include <vector>

namespace pbandit {

// Bookkeeping for delayed claim observations.
//
// Period t records its claim with a waiting time tau_t <= m; the claim
// becomes visible at t + tau_t. N(t) counts claims visible strictly before
// t. Once the horizon is complete (every claim visible by T), claims can be
// ranked by observation time (ties by origin), and the s-th observed claim,
// originating at period rho(s), has effective delay
//   tilde_tau_s = s - 1 - N(rho(s)),
// the number of observations the fit was short of when price rho(s) was set.
// Effective delays conserve the schedule total and never exceed 2m.
class DelayLedger {
 public:
  explicit DelayLedger(int m);

  // Record period t's claim (periods must be recorded in order: t = 1, 2, ...).
  void record_delay(int t, int tau, double claim);

  // All claims whose visibility time is exactly t, in origin order;
  // removes them from the pending queue.
  std::vector<std::pair<int, double>> collect(int t);

  // N(1..T+1): N[t-1] = number of claims with origin + tau < t.
  [[nodiscard]] std::vector<int> observed_counts(int horizon) const;

  // Origins ranked by observation time (ties by origin): rho(1..T).
  [[nodiscard]] std::vector<int> observation_order(int horizon) const;

  // tilde_tau_1..tilde_tau_T. Throws std::logic_error when some claim is
  // still invisible at the horizon.
  [[nodiscard]] std::vector<int> effective_delays(int horizon) const;

  [[nodiscard]] int max_delay() const { return m_; }
  [[nodiscard]] const std::vector<int>& taus() const { return taus_; }
  [[nodiscard]] int recorded_periods() const {
    return static_cast<int>(taus_.size());
  }

 private:
  void check_complete(int horizon) const;

  int m_ = 0;
  std::vector<int> taus_;  // taus_[i] is tau_{i+1}
  std::map<int, std::vector<std::pair<int, double>>> pending_;
};

}  // namespace pbandit
