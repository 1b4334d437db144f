#include "dirk/behavior.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace dirk {

Behavior::Behavior(int n_parties, int n_settings)
    : Behavior(std::vector<int>(n_parties, n_settings)) {}

Behavior::Behavior(std::vector<int> settings_per_party)
    : settings_(std::move(settings_per_party)) {
  if (settings_.empty() || settings_.size() > 8)
    throw std::invalid_argument("behavior party count must be in [1, 8]");
  for (int s : settings_)
    if (s < 1) throw std::invalid_argument("party needs at least one setting");
  table_.assign(static_cast<std::size_t>(n_setting_tuples()) * n_outcome_tuples(), 0.0);
}

int Behavior::n_setting_tuples() const {
  int n = 1;
  for (int s : settings_) n *= s;
  return n;
}

int Behavior::settings_index(const std::vector<int>& settings) const {
  if (static_cast<int>(settings.size()) != n_parties())
    throw std::invalid_argument("settings tuple has wrong arity");
  int idx = 0;
  for (int p = 0; p < n_parties(); ++p) {
    if (settings[p] < 1 || settings[p] > settings_[p])
      throw std::invalid_argument("setting out of range for party " + std::to_string(p));
    idx = idx * settings_[p] + (settings[p] - 1);
  }
  return idx;
}

int Behavior::outcomes_index(const std::vector<int>& outcomes) const {
  if (static_cast<int>(outcomes.size()) != n_parties())
    throw std::invalid_argument("outcomes tuple has wrong arity");
  int idx = 0;
  for (int p = 0; p < n_parties(); ++p) {
    if (outcomes[p] != 0 && outcomes[p] != 1)
      throw std::invalid_argument("outcomes are 0 ('+') or 1 ('-')");
    idx = (idx << 1) | outcomes[p];
  }
  return idx;
}

double& Behavior::at(const std::vector<int>& settings, const std::vector<int>& outcomes) {
  return table_[static_cast<std::size_t>(settings_index(settings)) * n_outcome_tuples() +
                outcomes_index(outcomes)];
}

double Behavior::at(const std::vector<int>& settings,
                    const std::vector<int>& outcomes) const {
  return table_[static_cast<std::size_t>(settings_index(settings)) * n_outcome_tuples() +
                outcomes_index(outcomes)];
}

double Behavior::correlator(const std::vector<int>& settings,
                            const std::vector<bool>& involved) const {
  if (static_cast<int>(involved.size()) != n_parties())
    throw std::invalid_argument("involved mask has wrong arity");
  const int base = settings_index(settings) * n_outcome_tuples();
  double total = 0.0;
  for (int a = 0; a < n_outcome_tuples(); ++a) {
    int sign = 0;
    for (int p = 0; p < n_parties(); ++p)
      if (involved[p]) sign ^= (a >> (n_parties() - 1 - p)) & 1;
    total += (sign ? -1.0 : 1.0) * table_[base + a];
  }
  return total;
}

double Behavior::normalization(const std::vector<int>& settings) const {
  const int base = settings_index(settings) * n_outcome_tuples();
  double total = 0.0;
  for (int a = 0; a < n_outcome_tuples(); ++a) total += table_[base + a];
  return total;
}

Behavior Behavior::marginal(const std::vector<int>& parties) const {
  std::vector<bool> keep(n_parties(), false);
  for (int p : parties) {
    if (p < 0 || p >= n_parties())
      throw std::invalid_argument("marginal party out of range");
    if (keep[p]) throw std::invalid_argument("duplicate party in marginal");
    keep[p] = true;
  }
  std::vector<int> kept;
  for (int p = 0; p < n_parties(); ++p)
    if (keep[p]) kept.push_back(p);
  if (kept.empty()) throw std::invalid_argument("marginal needs at least one party");

  std::vector<int> sub_settings;
  for (int p : kept) sub_settings.push_back(settings_[p]);
  Behavior out(sub_settings);

  std::vector<int> full_set(n_parties(), 1), full_out(n_parties(), 0);
  std::vector<int> sub_set(kept.size()), sub_out(kept.size());
  // iterate over the marginal's cells; sum dropped parties' outcomes at setting 1
  int m = static_cast<int>(kept.size());
  for (int si = 0; si < out.n_setting_tuples(); ++si) {
    int rem = si;
    for (int i = m - 1; i >= 0; --i) {
      sub_set[i] = rem % out.settings_[i] + 1;
      rem /= out.settings_[i];
    }
    for (int i = 0; i < m; ++i) full_set[kept[i]] = sub_set[i];
    for (int ai = 0; ai < out.n_outcome_tuples(); ++ai) {
      for (int i = 0; i < m; ++i) sub_out[i] = (ai >> (m - 1 - i)) & 1;
      double total = 0.0;
      // sum over dropped parties' outcomes
      int dropped = n_parties() - m;
      for (int d = 0; d < (1 << dropped); ++d) {
        int bit = 0;
        for (int p = 0, i = 0; p < n_parties(); ++p) {
          if (keep[p])
            full_out[p] = sub_out[i++];
          else
            full_out[p] = (d >> bit++) & 1;
        }
        total += at(full_set, full_out);
      }
      out.at(sub_set, sub_out) = total;
    }
  }
  return out;
}

Behavior mix_behaviors(const std::vector<Behavior>& parts,
                       const std::vector<double>& weights) {
  if (parts.empty() || parts.size() != weights.size())
    throw std::invalid_argument("mix needs matching nonempty parts and weights");
  double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(wsum - 1.0) > 1e-12)
    throw std::invalid_argument("mixture weights must sum to 1");
  Behavior out(parts[0].settings_per_party());
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (weights[k] < -1e-15) throw std::invalid_argument("negative mixture weight");
    if (parts[k].settings_per_party() != out.settings_per_party())
      throw std::invalid_argument("mixture components have different shapes");
    for (std::size_t i = 0; i < out.table().size(); ++i)
      out.table()[i] += weights[k] * parts[k].table()[i];
  }
  return out;
}

std::string Behavior::to_json() const {
  nlohmann::ordered_json j;
  j["parties"] = n_parties();
  j["settings_per_party"] = settings_;
  j["outcomes"] = 2;
  j["index_order"] = "settings-major, party 0 most significant, outcome 0 is '+'";
  j["table"] = table_;
  return j.dump();
}

Behavior Behavior::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Behavior b(j.at("settings_per_party").get<std::vector<int>>());
  auto table = j.at("table").get<std::vector<double>>();
  if (table.size() != b.table().size())
    throw std::invalid_argument("behavior table has wrong length");
  b.table() = std::move(table);
  return b;
}

}  // namespace dirk
