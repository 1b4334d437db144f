#include "dirk/bell_algebra.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <stdexcept>

#include "dirk/behavior.hpp"
#include "json.hpp"

namespace dirk {

namespace {

void check_party_count(int n_parties) {
  if (n_parties < 1 || n_parties > kMaxParties)
    throw std::invalid_argument("party count must be in [1, " +
                                std::to_string(kMaxParties) + "], got " +
                                std::to_string(n_parties));
}

char party_letter(int party) { return static_cast<char>('A' + party); }

}  // namespace

Monomial::Monomial(int n_parties) {
  check_party_count(n_parties);
  words_.resize(n_parties);
}

void Monomial::reduce_append(int party, std::uint8_t setting) {
  auto& w = words_[party];
  if (!w.empty() && w.back() == setting)
    w.pop_back();  // X^2 = 1
  else
    w.push_back(setting);
}

Monomial Monomial::from_word(std::span<const PartyObservable> word, int n_parties) {
  Monomial m(n_parties);
  for (const auto& o : word) {
    if (o.party < 0 || o.party >= n_parties)
      throw std::invalid_argument("observable party " + std::to_string(o.party) +
                                  " out of range for " + std::to_string(n_parties) +
                                  " parties");
    if (o.setting < 1)
      throw std::invalid_argument("settings are 1-based, got " +
                                  std::to_string(o.setting));
    m.reduce_append(o.party, static_cast<std::uint8_t>(o.setting));
  }
  return m;
}

Monomial Monomial::single(PartyObservable o, int n_parties) {
  return from_word(std::span<const PartyObservable>(&o, 1), n_parties);
}

bool Monomial::is_identity() const {
  return std::all_of(words_.begin(), words_.end(),
                     [](const auto& w) { return w.empty(); });
}

int Monomial::degree() const {
  int d = 0;
  for (const auto& w : words_) d += static_cast<int>(w.size());
  return d;
}

int Monomial::degree(int party) const {
  return static_cast<int>(words_.at(party).size());
}

Monomial Monomial::adjoint() const {
  Monomial m = *this;
  for (auto& w : m.words_) std::reverse(w.begin(), w.end());
  return m;
}

Monomial operator*(const Monomial& a, const Monomial& b) {
  if (a.n_parties() != b.n_parties())
    throw std::invalid_argument("monomial product across different party counts");
  Monomial m = a;
  for (int p = 0; p < b.n_parties(); ++p)
    for (std::uint8_t s : b.words_[p]) m.reduce_append(p, s);
  return m;
}

std::strong_ordering Monomial::operator<=>(const Monomial& other) const {
  if (auto c = n_parties() <=> other.n_parties(); c != 0) return c;
  if (auto c = degree() <=> other.degree(); c != 0) return c;
  // lexicographic on the factor sequence read parties-ascending
  for (int p = 0; p < n_parties(); ++p) {
    const auto &a = words_[p], &b = other.words_[p];
    std::size_t k = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < k; ++i)
      if (auto c = a[i] <=> b[i]; c != 0) return c;
    if (a.size() != b.size()) {
      // shorter word here means the next factor belongs to a later party
      return a.size() < b.size() ? std::strong_ordering::greater
                                 : std::strong_ordering::less;
    }
  }
  return std::strong_ordering::equal;
}

std::string Monomial::str() const {
  if (is_identity()) return "1";
  std::string out;
  for (int p = 0; p < n_parties(); ++p)
    for (std::uint8_t s : words_[p]) {
      if (!out.empty()) out += '*';
      out += party_letter(p);
      out += std::to_string(static_cast<int>(s));
    }
  return out;
}

Monomial Monomial::parse(std::string_view text, int n_parties) {
  check_party_count(n_parties);
  if (text == "1") return identity(n_parties);
  std::vector<PartyObservable> word;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('*', pos);
    std::string_view tok = text.substr(pos, end == std::string_view::npos
                                                ? std::string_view::npos
                                                : end - pos);
    if (tok.size() < 2 || !std::isupper(static_cast<unsigned char>(tok[0])))
      throw std::invalid_argument("bad monomial factor '" + std::string(tok) + "'");
    int party = tok[0] - 'A';
    int setting = 0;
    auto [ptr, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), setting);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      throw std::invalid_argument("bad monomial factor '" + std::string(tok) + "'");
    word.push_back({party, setting});
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  if (word.empty()) throw std::invalid_argument("empty monomial string");
  return from_word(word, n_parties);
}

template class PolynomialT<double>;

// ---- standard expressions -------------------------------------------------

BellExpression mermin_n(int n) {
  check_party_count(n);
  BellExpression e(n);
  // Expand Re prod_p (X_{p,1} + i X_{p,2}): subsets with an even number of
  // second settings survive, signed by (-1)^(|subset|/2).
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    int k = std::popcount(mask);
    if (k % 2 != 0) continue;
    std::vector<PartyObservable> word;
    for (int p = 0; p < n; ++p) word.push_back({p, (mask >> p) & 1u ? 2 : 1});
    e.add_term(Monomial::from_word(word, n), (k % 4 == 0) ? 1.0 : -1.0);
  }
  return e;
}

BellExpression mermin() { return mermin_n(3); }

BellExpression mermin_prime() {
  // Im part of the same product: odd subsets, sign (-1)^((|subset|-1)/2).
  constexpr int n = 3;
  BellExpression e(n);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    int k = std::popcount(mask);
    if (k % 2 == 0) continue;
    std::vector<PartyObservable> word;
    for (int p = 0; p < n; ++p) word.push_back({p, (mask >> p) & 1u ? 2 : 1});
    e.add_term(Monomial::from_word(word, n), (k % 4 == 1) ? 1.0 : -1.0);
  }
  return e;
}

BellExpression svetlichny() { return mermin() + mermin_prime(); }

BellExpression chsh() {
  BellExpression e(2);
  for (int x = 1; x <= 2; ++x)
    for (int y = 1; y <= 2; ++y) {
      std::vector<PartyObservable> w{{0, x}, {1, y}};
      e.add_term(Monomial::from_word(w, 2), (x == 2 && y == 2) ? -1.0 : 1.0);
    }
  return e;
}

// ---- levels ----------------------------------------------------------------

LevelSpec LevelSpec::parse(std::string_view text, int n_parties) {
  check_party_count(n_parties);
  LevelSpec level;
  level.n_parties = n_parties;
  std::vector<std::vector<int>> pats;
  pats.push_back(std::vector<int>(n_parties, 0));  // identity always present

  std::size_t pos = 0;
  bool saw_term = false;
  while (pos <= text.size()) {
    std::size_t end = std::min(text.find('+', pos), text.size());
    std::string_view raw = text.substr(pos, end - pos);
    // trim
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.front())))
      raw.remove_prefix(1);
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back())))
      raw.remove_suffix(1);
    if (raw.empty()) {
      if (saw_term || end < text.size())
        throw std::invalid_argument("empty term in level spec");
    } else if (raw == "1") {
      for (int p = 0; p < n_parties; ++p) {
        std::vector<int> pat(n_parties, 0);
        pat[p] = 1;
        pats.push_back(pat);
      }
    } else {
      std::vector<int> pat(n_parties, 0);
      std::size_t i = 0;
      while (i < raw.size()) {
        char c = raw[i];
        if (c < 'A' || c >= 'A' + n_parties)
          throw std::invalid_argument("unknown party letter '" + std::string(1, c) +
                                      "' in level spec term '" + std::string(raw) + "'");
        int party = c - 'A';
        int expo = 1;
        ++i;
        if (i < raw.size() && raw[i] == '^') {
          ++i;
          std::size_t j = i;
          while (j < raw.size() && std::isdigit(static_cast<unsigned char>(raw[j]))) ++j;
          if (j == i)
            throw std::invalid_argument("missing exponent in level spec term '" +
                                        std::string(raw) + "'");
          expo = 0;
          std::from_chars(raw.data() + i, raw.data() + j, expo);
          if (expo < 1) throw std::invalid_argument("exponent must be >= 1");
          i = j;
        }
        pat[party] += expo;
      }
      pats.push_back(pat);
    }
    saw_term = true;
    if (end == text.size()) break;
    pos = end + 1;
  }

  std::sort(pats.begin(), pats.end());
  pats.erase(std::unique(pats.begin(), pats.end()), pats.end());
  level.patterns = std::move(pats);
  return level;
}

std::string LevelSpec::str() const {
  std::string out;
  bool ones_done = false;
  for (const auto& pat : patterns) {
    int total = 0, nonzero = 0;
    for (int v : pat) total += v, nonzero += (v > 0);
    std::string term;
    if (total == 0 || (total == 1 && nonzero == 1)) {
      if (ones_done) continue;
      ones_done = true;
      term = "1";
    } else {
      for (int p = 0; p < n_parties; ++p) {
        if (pat[p] == 0) continue;
        term += party_letter(p);
        if (pat[p] > 1) term += "^" + std::to_string(pat[p]);
      }
    }
    if (!out.empty()) out += "+";
    out += term;
  }
  return out;
}

namespace {

// All setting words of given length with no two adjacent letters equal.
void alternating_words(int length, int n_settings, std::vector<std::uint8_t>& cur,
                       std::vector<std::vector<std::uint8_t>>& out) {
  if (static_cast<int>(cur.size()) == length) {
    out.push_back(cur);
    return;
  }
  for (int s = 1; s <= n_settings; ++s) {
    if (!cur.empty() && cur.back() == s) continue;
    cur.push_back(static_cast<std::uint8_t>(s));
    alternating_words(length, n_settings, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<Monomial> enumerate_monomials(const LevelSpec& level, int n_settings) {
  if (n_settings < 2) throw std::invalid_argument("need at least two settings");
  std::vector<Monomial> out;
  for (const auto& pat : level.patterns) {
    // per-party candidate words
    std::vector<std::vector<std::vector<std::uint8_t>>> choices(level.n_parties);
    for (int p = 0; p < level.n_parties; ++p) {
      std::vector<std::uint8_t> cur;
      alternating_words(pat[p], n_settings, cur, choices[p]);
    }
    // cross product
    std::vector<std::size_t> idx(level.n_parties, 0);
    while (true) {
      std::vector<PartyObservable> word;
      for (int p = 0; p < level.n_parties; ++p)
        for (std::uint8_t s : choices[p][idx[p]]) word.push_back({p, s});
      out.push_back(Monomial::from_word(word, level.n_parties));
      int p = level.n_parties - 1;
      while (p >= 0 && ++idx[p] == choices[p].size()) idx[p--] = 0;
      if (p < 0) break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---- JSON -------------------------------------------------------------------

std::string expression_to_json(const BellExpression& e) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [m, c] : e.terms()) j[m.str()] = c;
  return j.dump();
}

BellExpression expression_from_json(std::string_view json_text, int n_parties) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  if (!j.is_object()) throw std::invalid_argument("expression JSON must be an object");
  BellExpression e(n_parties);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number())
      throw std::invalid_argument("coefficient of '" + it.key() + "' is not a number");
    e.add_term(Monomial::parse(it.key(), n_parties), it.value().get<double>());
  }
  return e;
}

// ---- behavior evaluation ----------------------------------------------------

double evaluate_on_behavior(const BellExpression& e, const Behavior& b) {
  if (e.n_parties() != b.n_parties())
    throw std::invalid_argument("expression and behavior party counts differ");
  double total = 0.0;
  for (const auto& [m, c] : e.terms()) {
    std::vector<int> settings(b.n_parties(), 1);
    std::vector<bool> involved(b.n_parties(), false);
    for (int p = 0; p < m.n_parties(); ++p) {
      if (m.degree(p) == 0) continue;
      if (m.degree(p) > 1)
        throw std::invalid_argument("monomial " + m.str() +
                                    " has a repeated party; no correlator exists");
      settings[p] = m.word(p)[0];
      involved[p] = true;
    }
    total += c * b.correlator(settings, involved);
  }
  return total;
}

}  // namespace dirk
