#include "premium_bandit/delay.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pbandit {

DelayLedger::DelayLedger(int m) : m_(m) {
  if (m < 0) throw std::invalid_argument("delay: m must be >= 0");
}

void DelayLedger::record_delay(int t, int tau, double claim) {
  if (t != static_cast<int>(taus_.size()) + 1) {
    throw std::logic_error("delay: periods must be recorded in order");
  }
  if (tau < 0 || tau > m_) {
    throw std::domain_error("delay: tau " + std::to_string(tau) +
                            " outside [0, " + std::to_string(m_) + "]");
  }
  taus_.push_back(tau);
  pending_[t + tau].emplace_back(t, claim);
}

std::vector<std::pair<int, double>> DelayLedger::collect(int t) {
  if (t < 1) throw std::domain_error("delay: collect requires t >= 1");
  const auto it = pending_.find(t);
  if (it == pending_.end()) return {};
  std::vector<std::pair<int, double>> out = std::move(it->second);
  pending_.erase(it);
  return out;  // recording order == origin order
}

std::vector<int> DelayLedger::observed_counts(int horizon) const {
  std::vector<int> n(static_cast<std::size_t>(horizon) + 1, 0);
  for (int t = 1; t <= horizon + 1; ++t) {
    int count = 0;
    const int upto = std::min<int>(t - 1, static_cast<int>(taus_.size()));
    for (int i = 1; i <= upto; ++i) {
      if (i + taus_[static_cast<std::size_t>(i - 1)] < t) ++count;
    }
    n[static_cast<std::size_t>(t - 1)] = count;
  }
  return n;
}

void DelayLedger::check_complete(int horizon) const {
  if (static_cast<int>(taus_.size()) != horizon) {
    throw std::logic_error("delay: horizon has " +
                           std::to_string(taus_.size()) +
                           " recorded periods, expected " +
                           std::to_string(horizon));
  }
  for (int i = 1; i <= horizon; ++i) {
    if (i + taus_[static_cast<std::size_t>(i - 1)] > horizon) {
      throw std::logic_error("delay: claim of period " + std::to_string(i) +
                             " is not visible by the horizon");
    }
  }
}

std::vector<int> DelayLedger::observation_order(int horizon) const {
  check_complete(horizon);
  std::vector<int> origins(static_cast<std::size_t>(horizon));
  for (int i = 0; i < horizon; ++i) origins[static_cast<std::size_t>(i)] = i + 1;
  std::stable_sort(origins.begin(), origins.end(), [&](int a, int b) {
    return a + taus_[static_cast<std::size_t>(a - 1)] <
           b + taus_[static_cast<std::size_t>(b - 1)];
  });
  return origins;
}

std::vector<int> DelayLedger::effective_delays(int horizon) const {
  const std::vector<int> rho = observation_order(horizon);
  const std::vector<int> n = observed_counts(horizon);
  std::vector<int> tilde(static_cast<std::size_t>(horizon), 0);
  for (int s = 1; s <= horizon; ++s) {
    const int origin = rho[static_cast<std::size_t>(s - 1)];
    tilde[static_cast<std::size_t>(s - 1)] =
        s - 1 - n[static_cast<std::size_t>(origin - 1)];
  }
  return tilde;
}

}  // namespace pbandit
