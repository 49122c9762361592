#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "qembed/model.hpp"

namespace qembed {

namespace {

using Key = std::tuple<int, int, int, int>;

// Canonical representative of a symmetry class (0-based indices).
Key canonical(int p, int q, int r, int s) {
  if (p < q) std::swap(p, q);
  if (r < s) std::swap(r, s);
  if (std::pair{p, q} < std::pair{r, s}) {
    std::swap(p, r);
    std::swap(q, s);
  }
  return {p, q, r, s};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_header_field(const std::string& line, const std::string& key,
                       int line_no) {
  const auto pos = line.find(key + "=");
  if (pos == std::string::npos)
    throw ParseError(line_no, "header lacks " + key + "=");
  std::istringstream in(line.substr(pos + key.size() + 1));
  long v = -1;
  if (!(in >> v) || v < 0)
    throw ParseError(line_no, "bad value for " + key);
  return static_cast<int>(v);
}

struct Entry {
  Key raw;
  double value;
  int line;
};

}  // namespace

IntegralFile parse_integrals(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  IntegralFile out;
  int n = 0;
  std::map<Key, Entry> one;
  std::map<Key, Entry> two;
  bool have_core = false;

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (!have_header) {
      if (line.find("NORB") == std::string::npos)
        throw ParseError(line_no, "expected header NORB=<N> NELEC=<n>");
      n = parse_header_field(line, "NORB", line_no);
      out.electrons = parse_header_field(line, "NELEC", line_no);
      if (n > kMaxModes) throw ParseError(line_no, "NORB exceeds 63");
      if (out.electrons > n) throw ParseError(line_no, "NELEC exceeds NORB");
      out.integrals = MolecularIntegrals(n);
      have_header = true;
      continue;
    }
    std::istringstream rec(line);
    long p = 0, q = 0, r = 0, s = 0;
    double v = 0.0;
    std::string extra;
    if (!(rec >> p >> q >> r >> s >> v))
      throw ParseError(line_no, "expected 'p q r s value'");
    if (rec >> extra) throw ParseError(line_no, "trailing text '" + extra + "'");
    if (!std::isfinite(v)) throw ParseError(line_no, "non-finite value");
    for (long i : {p, q, r, s})
      if (i < 0 || i > n) throw ParseError(line_no, "index out of range 0.." + std::to_string(n));

    if (p == 0 && q == 0 && r == 0 && s == 0) {
      if (have_core) ++out.duplicate_warnings;
      have_core = true;
      out.integrals.set_core_energy(v);
    } else if (r == 0 && s == 0) {
      if (p == 0 || q == 0) throw ParseError(line_no, "one-body record needs p, q >= 1");
      const int a = static_cast<int>(p) - 1;
      const int b = static_cast<int>(q) - 1;
      const Key raw{a, b, -1, -1};
      const Key key{std::max(a, b), std::min(a, b), -1, -1};
      auto it = one.find(key);
      if (it != one.end()) {
        if (it->second.raw == raw)
          ++out.duplicate_warnings;
        else if (it->second.value != v)
          throw InvalidArgument("line " + std::to_string(line_no) +
                                ": h is not symmetric (conflicts with line " +
                                std::to_string(it->second.line) + ")");
      }
      one[key] = Entry{raw, v, line_no};
    } else {
      if (p == 0 || q == 0 || r == 0 || s == 0)
        throw ParseError(line_no, "two-body record needs all indices >= 1");
      const Key raw{static_cast<int>(p) - 1, static_cast<int>(q) - 1,
                    static_cast<int>(r) - 1, static_cast<int>(s) - 1};
      const Key key = std::apply(canonical, raw);
      auto it = two.find(key);
      if (it != two.end()) {
        if (it->second.raw == raw)
          ++out.duplicate_warnings;
        else if (it->second.value != v)
          throw InvalidArgument("line " + std::to_string(line_no) +
                                ": two-body entry violates 8-fold symmetry "
                                "(conflicts with line " +
                                std::to_string(it->second.line) + ")");
      }
      two[key] = Entry{raw, v, line_no};
    }
  }
  if (!have_header) throw ParseError(line_no + 1, "missing header NORB=<N> NELEC=<n>");
  for (const auto& [key, e] : one) {
    const auto [a, b, unused1, unused2] = key;
    out.integrals.one_body()(a, b) = e.value;
    out.integrals.one_body()(b, a) = e.value;
  }
  for (const auto& [key, e] : two) {
    const auto [a, b, c, d] = key;
    out.integrals.set_two_body(a, b, c, d, e.value);
  }
  return out;
}

IntegralFile read_integrals(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open integral file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_integrals(buf.str());
}

std::string format_integrals(const MolecularIntegrals& m, int electrons) {
  const int n = m.n_modes();
  std::string out = "NORB=" + std::to_string(n) + " NELEC=" + std::to_string(electrons) + "\n";
  char buf[128];
  auto emit = [&](int p, int q, int r, int s, double v) {
    std::snprintf(buf, sizeof buf, "%d %d %d %d %.17g\n", p, q, r, s, v);
    out += buf;
  };
  emit(0, 0, 0, 0, m.core_energy());
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      if (m.one_body()(p, q) != 0.0) emit(p + 1, q + 1, 0, 0, m.one_body()(p, q));
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r <= p; ++r)
        for (int s = 0; s <= r; ++s) {
          if (std::pair{p, q} < std::pair{r, s}) continue;
          const double v = m.two_body(p, q, r, s);
          if (v != 0.0) emit(p + 1, q + 1, r + 1, s + 1, v);
        }
  return out;
}

void write_integrals(const MolecularIntegrals& m, int electrons,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write integral file " + path.string());
  out << format_integrals(m, electrons);
  if (!out) throw Error("write failed for " + path.string());
}

std::string model_hash(const MolecularIntegrals& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : format_integrals(m, 0)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qembed
