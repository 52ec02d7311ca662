#include "convexnn/pattern.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "convexnn/textio.hpp"

namespace cvxnn {

std::string ArrangementPattern::bit_string() const {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) s[i] = '1';
  return s;
}

ArrangementPattern ArrangementPattern::from_bit_string(const std::string& s) {
  std::vector<std::uint8_t> b(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1')
      throw std::invalid_argument("ArrangementPattern: bad bit character");
    b[i] = s[i] == '1' ? 1 : 0;
  }
  return ArrangementPattern(std::move(b));
}

ArrangementPattern ArrangementPattern::of_direction(const Eigen::MatrixXd& X,
                                                    const Eigen::VectorXd& u) {
  ArrangementPattern p;
  p.bits.resize(static_cast<std::size_t>(X.rows()));
  const Eigen::VectorXd s = X * u;
  for (Eigen::Index i = 0; i < s.size(); ++i) p.bits[i] = s[i] >= 0.0 ? 1 : 0;
  p.witness = u;
  return p;
}

std::string to_string(PatternSource s) {
  switch (s) {
    case PatternSource::exact: return "exact";
    case PatternSource::gaussian: return "gaussian";
    case PatternSource::convolutional: return "convolutional";
    case PatternSource::user: return "user";
  }
  return "user";
}

PatternSource pattern_source_from_string(const std::string& s) {
  if (s == "exact") return PatternSource::exact;
  if (s == "gaussian") return PatternSource::gaussian;
  if (s == "convolutional") return PatternSource::convolutional;
  if (s == "user") return PatternSource::user;
  throw std::invalid_argument("unknown pattern source: " + s);
}

void PatternSet::canonicalize() {
  std::stable_sort(patterns.begin(), patterns.end(),
                   [](const auto& a, const auto& b) { return a.bits < b.bits; });
  patterns.erase(std::unique(patterns.begin(), patterns.end(),
                             [](const auto& a, const auto& b) { return a.bits == b.bits; }),
                 patterns.end());
}

void PatternSet::merge(const PatternSet& other) {
  if (n != other.n && !patterns.empty() && !other.patterns.empty())
    throw std::invalid_argument("PatternSet::merge: length mismatch");
  if (patterns.empty()) n = other.n;
  patterns.insert(patterns.end(), other.patterns.begin(), other.patterns.end());
  canonicalize();
}

bool PatternSet::contains(const ArrangementPattern& p) const {
  return index_of(p).has_value();
}

std::optional<std::size_t> PatternSet::index_of(const ArrangementPattern& p) const {
  auto it = std::lower_bound(patterns.begin(), patterns.end(), p,
                             [](const auto& a, const auto& b) { return a.bits < b.bits; });
  if (it != patterns.end() && it->bits == p.bits)
    return static_cast<std::size_t>(it - patterns.begin());
  return std::nullopt;
}

std::string PatternSet::serialize() const {
  std::ostringstream os;
  os << "# n=" << n << " source=" << to_string(source);
  if (seed) os << " seed=" << *seed;
  os << "\n";
  for (const auto& p : patterns) {
    os << p.bit_string();
    if (p.witness) {
      os << " ";
      for (Eigen::Index i = 0; i < p.witness->size(); ++i) {
        if (i) os << ",";
        os << format_double((*p.witness)[i]);
      }
    }
    os << "\n";
  }
  return os.str();
}

PatternSet PatternSet::deserialize(const std::string& text) {
  PatternSet set;
  std::istringstream is(text);
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tok;
      while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "n") set.n = std::stoul(val);
        else if (key == "source") set.source = pattern_source_from_string(val);
        else if (key == "seed") set.seed = std::stoull(val);
      }
      have_header = true;
      continue;
    }
    std::istringstream ls(line);
    std::string bits_str, witness_str;
    ls >> bits_str;
    ArrangementPattern p = ArrangementPattern::from_bit_string(bits_str);
    if (ls >> witness_str) {
      std::vector<double> w;
      std::istringstream ws(witness_str);
      std::string cell;
      while (std::getline(ws, cell, ',')) w.push_back(std::stod(cell));
      p.witness = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    }
    set.patterns.push_back(std::move(p));
  }
  if (!have_header && !set.patterns.empty()) set.n = set.patterns.front().size();
  for (const auto& p : set.patterns)
    if (p.size() != set.n)
      throw std::invalid_argument("PatternSet: inconsistent pattern length");
  set.canonicalize();
  return set;
}

void PatternSet::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("PatternSet: cannot open " + path);
  f << serialize();
}

PatternSet PatternSet::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("PatternSet: cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return deserialize(os.str());
}

Eigen::VectorXd kappa_diagonal(const ArrangementPattern& p, double kappa) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) d[static_cast<Eigen::Index>(i)] = p.bits[i] ? 1.0 : kappa;
  return d;
}

Eigen::VectorXd sign_diagonal(const ArrangementPattern& p) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) d[static_cast<Eigen::Index>(i)] = p.bits[i] ? 1.0 : -1.0;
  return d;
}

}  // namespace cvxnn
