#pragma once

// Conditional probability tables P(a_1...a_n | x_1...x_n) for n parties with
// binary outcomes.  Setting counts may differ per party (the steering
// construction appends a third setting to one party); outcomes are always
// two, encoded 0 = '+' and 1 = '-'.
//
// Flat index convention (documented for serialization): party 0 is the most
// significant digit in both the settings index and the outcomes index, and
// the table is laid out settings-major:
//   table[settings_index * 2^n + outcomes_index]
// with settings_index = sum_p x_p * prod_{q>p} n_settings(q)  (x_p 0-based)
// and  outcomes_index = sum_p a_p * 2^(n-1-p).

#include <string>
#include <vector>

namespace dirk {

class Behavior {
 public:
  Behavior() = default;
  // All parties share `n_settings` settings; table zero-initialized.
  Behavior(int n_parties, int n_settings);
  explicit Behavior(std::vector<int> settings_per_party);

  int n_parties() const { return static_cast<int>(settings_.size()); }
  int n_settings(int party) const { return settings_.at(party); }
  const std::vector<int>& settings_per_party() const { return settings_; }
  int n_outcome_tuples() const { return 1 << n_parties(); }
  int n_setting_tuples() const;

  double& at(const std::vector<int>& settings, const std::vector<int>& outcomes);
  double at(const std::vector<int>& settings, const std::vector<int>& outcomes) const;
  // Raw flat access in the documented order.
  const std::vector<double>& table() const { return table_; }
  std::vector<double>& table() { return table_; }

  int settings_index(const std::vector<int>& settings) const;  // 1-based in, flat out
  int outcomes_index(const std::vector<int>& outcomes) const;  // 0='+',1='-'

  // <prod_{p involved} sign(a_p)> at the given settings (1-based); parties with
  // involved[p] == false are summed over.
  double correlator(const std::vector<int>& settings,
                    const std::vector<bool>& involved) const;

  // Marginal table of the given parties (ascending party order kept), obtained
  // by summing the others at their first setting.  For no-signalling behaviors
  // the choice of dropped setting is irrelevant.
  Behavior marginal(const std::vector<int>& parties) const;

  // Sum of outcomes at one settings tuple (should be 1 for a normalized table).
  double normalization(const std::vector<int>& settings) const;

  std::string to_json() const;
  static Behavior from_json(const std::string& text);

 private:
  std::vector<int> settings_;
  std::vector<double> table_;
};

// w-weighted convex combination; parties and setting counts must match.
Behavior mix_behaviors(const std::vector<Behavior>& parts,
                       const std::vector<double>& weights);

}  // namespace dirk
