/* Copyright 2026 The Spintraj Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "spintraj/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace spintraj::io {

namespace {

// ---- small text helpers -----------------------------------------------------

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

double parse_double(std::string_view token, const std::string &where) {
  const std::string t = trim(token);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ParseError(where + ": expected a number, got '" + t + "'");
  if (!std::isfinite(v)) throw ParseError(where + ": non-finite value '" + t + "'");
  return v;
}

long long parse_int(std::string_view token, const std::string &where) {
  const std::string t = trim(token);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ParseError(where + ": expected an integer, got '" + t + "'");
  return v;
}

std::vector<std::string> tokens_of(const std::string &line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

// ---- YAML helpers ---------------------------------------------------------------

std::string where(const YAML::Node &node, const std::string &field) {
  const auto mark = node.Mark();
  if (mark.line < 0) return "field '" + field + "'";
  return "line " + std::to_string(mark.line + 1) + ", column " + std::to_string(mark.column + 1) + ", field '" +
         field + "'";
}

template <typename T>
T scalar(const YAML::Node &node, const std::string &field) {
  if (!node.IsScalar()) throw ParseError(where(node, field) + ": expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception &) {
    throw ParseError(where(node, field) + ": cannot read value '" + node.Scalar() + "'");
  }
}

template <typename T>
T optional_scalar(const YAML::Node &parent, const std::string &field, T fallback) {
  const auto node = parent[field];
  if (!node) return fallback;
  return scalar<T>(node, field);
}

double finite_scalar(const YAML::Node &node, const std::string &field) {
  const double v = scalar<double>(node, field);
  if (!std::isfinite(v)) throw ParseError(where(node, field) + ": value must be finite");
  return v;
}

const YAML::Node required(const YAML::Node &parent, const std::string &field) {
  const auto node = parent[field];
  if (!node) throw ParseError(where(parent, field) + ": missing required field");
  return node;
}

void reject_unknown(const YAML::Node &map, std::initializer_list<std::string_view> known, const std::string &ctx) {
  for (const auto &kv : map) {
    const auto key = kv.first.Scalar();
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw ParseError(where(kv.first, key) + ": unknown key in " + ctx);
  }
}

YAML::Node load_yaml(std::string_view text) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::ParserException &e) {
    throw ParseError("line " + std::to_string(e.mark.line + 1) + ", column " + std::to_string(e.mark.column + 1) +
                     ": " + e.msg);
  }
}

std::size_t resolve_spin(const SpinSystem &sys, const YAML::Node &node, const std::string &field) {
  const auto ref = scalar<std::string>(node, field);
  const auto idx = sys.find(ref);
  if (!idx) throw ParseError(where(node, field) + ": unknown spin '" + ref + "'");
  return *idx;
}

SpinSystem system_from_yaml(const YAML::Node &root) {
  if (!root.IsMap()) throw ParseError("spin system document must be a mapping");
  reject_unknown(root, {"spins", "couplings", "quadrupolar"}, "spin system");
  SpinSystem sys;
  const auto spins = required(root, "spins");
  if (!spins.IsSequence() || spins.size() == 0) throw ParseError(where(spins, "spins") + ": expected a non-empty list");
  for (const auto &node : spins) {
    if (!node.IsMap()) throw ParseError(where(node, "spins") + ": each spin must be a mapping");
    reject_unknown(node, {"name", "isotope", "multiplicity", "offset_hz"}, "spin");
    Spin s;
    s.isotope = scalar<std::string>(required(node, "isotope"), "isotope");
    s.name = optional_scalar<std::string>(node, "name", "");
    if (node["offset_hz"]) s.offset_hz = finite_scalar(node["offset_hz"], "offset_hz");
    if (node["multiplicity"]) {
      s.multiplicity = scalar<int>(node["multiplicity"], "multiplicity");
      if (s.multiplicity < 2) throw ParseError(where(node["multiplicity"], "multiplicity") + ": must be at least 2");
    } else if (auto m = isotope_multiplicity(s.isotope)) {
      s.multiplicity = *m;
    } else {
      throw ParseError(where(node, "multiplicity") + ": unknown isotope '" + s.isotope +
                       "' needs an explicit multiplicity");
    }
    if (!s.name.empty() && std::all_of(s.name.begin(), s.name.end(), [](unsigned char c) { return std::isdigit(c); }))
      throw ParseError(where(node["name"], "name") + ": spin names must not be plain integers");
    sys.spins.push_back(std::move(s));
  }

  if (const auto couplings = root["couplings"]) {
    if (!couplings.IsSequence()) throw ParseError(where(couplings, "couplings") + ": expected a list");
    for (const auto &node : couplings) {
      reject_unknown(node, {"between", "j_hz", "model"}, "coupling");
      const auto between = required(node, "between");
      if (!between.IsSequence() || between.size() != 2)
        throw ParseError(where(between, "between") + ": expected a pair of spin references");
      std::size_t i = resolve_spin(sys, between[0], "between"), j = resolve_spin(sys, between[1], "between");
      if (i == j) throw ParseError(where(between, "between") + ": a spin cannot couple to itself");
      if (i > j) std::swap(i, j);
      Coupling c{i, j, finite_scalar(required(node, "j_hz"), "j_hz"), default_coupling_model(sys, i, j)};
      if (const auto model = node["model"]) {
        const auto m = scalar<std::string>(model, "model");
        if (m == "weak") c.model = CouplingModel::weak;
        else if (m == "strong") c.model = CouplingModel::strong;
        else throw ParseError(where(model, "model") + ": expected weak or strong, got '" + m + "'");
      }
      for (const auto &existing : sys.couplings)
        if (existing.i == c.i && existing.j == c.j)
          throw ParseError(where(node, "couplings") + ": duplicate coupling between spins " + std::to_string(i) +
                           " and " + std::to_string(j));
      sys.couplings.push_back(c);
    }
  }

  if (const auto quads = root["quadrupolar"]) {
    if (!quads.IsSequence()) throw ParseError(where(quads, "quadrupolar") + ": expected a list");
    for (const auto &node : quads) {
      reject_unknown(node, {"spin", "omega_q_hz", "eta"}, "quadrupolar entry");
      Quadrupolar q;
      q.spin = resolve_spin(sys, required(node, "spin"), "spin");
      q.omega_q_hz = finite_scalar(required(node, "omega_q_hz"), "omega_q_hz");
      if (node["eta"]) {
        q.eta = finite_scalar(node["eta"], "eta");
        if (q.eta < 0.0 || q.eta > 1.0) throw ParseError(where(node["eta"], "eta") + ": eta must lie in [0, 1]");
      }
      if (sys.spins[q.spin].multiplicity < 3)
        throw ParseError(where(node, "spin") + ": quadrupolar interaction needs multiplicity >= 3");
      sys.quadrupolar.push_back(q);
    }
  }

  try {
    validate(sys);
  } catch (const DomainError &e) {
    throw ParseError(std::string("invalid spin system: ") + e.what());
  }
  return sys;
}

// ---- state expressions ------------------------------------------------------------

class StateParser {
 public:
  StateParser(std::string_view text, const SpinSystem &sys) : text_(text), sys_(sys), mult_(sys.multiplicities()) {
    dim_ = static_cast<Eigen::Index>(sys.hilbert_dim());
  }

  cx_mat parse() {
    cx_mat v = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return v;
  }

 private:
  // Scalars are kept as multiples of the identity.
  cx_mat expr() {
    skip();
    cx_mat acc;
    bool negate = false;
    if (peek('+') || peek('-')) negate = text_[pos_++] == '-';
    acc = term();
    if (negate) acc = -acc;
    for (;;) {
      skip();
      if (peek('+')) {
        ++pos_;
        acc += term();
      } else if (peek('-')) {
        ++pos_;
        acc -= term();
      } else {
        return acc;
      }
    }
  }

  cx_mat term() {
    cx_mat acc = factor();
    for (;;) {
      skip();
      if (peek('*')) {
        ++pos_;
        acc = acc * factor();
      } else if (peek('/')) {
        ++pos_;
        const cx_mat d = factor();
        const cd s = d(0, 0);
        if (!d.isApprox(s * cx_mat::Identity(dim_, dim_)) || s == cd(0.0))
          fail("division only by non-zero scalars");
        acc = acc / s;
      } else {
        return acc;
      }
    }
  }

  cx_mat factor() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      cx_mat v = expr();
      expect(')');
      return v;
    }
    if (c == '-') {
      ++pos_;
      return -factor();
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    std::string name = identifier();
    if (name == "i") return ci * identity();
    if (name == "E") return identity();
    if (name == "Lx" || name == "Ly" || name == "Lz" || name == "Lp" || name == "Lm") {
      expect('(');
      const auto spin = spin_ref();
      expect(')');
      const SpinAxis axis = name == "Lx"   ? SpinAxis::x
                            : name == "Ly" ? SpinAxis::y
                            : name == "Lz" ? SpinAxis::z
                            : name == "Lp" ? SpinAxis::plus
                                           : SpinAxis::minus;
      return spin_operator(sys_, spin, axis);
    }
    if (name == "T") {
      expect('(');
      const auto spin = spin_ref();
      expect(',');
      const int l = integer();
      expect(',');
      const int m = integer();
      expect(')');
      try {
        return embed(mult_, spin, ist_operator(mult_[spin], l, m));
      } catch (const DomainError &e) {
        fail(e.what());
      }
    }
    fail("unknown operator '" + name + "'");
  }

  cx_mat number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                                   text_[pos_] == 'e' || text_[pos_] == 'E' ||
                                   ((text_[pos_] == '-' || text_[pos_] == '+') && pos_ > start &&
                                    (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
      ++pos_;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) fail("malformed number");
    if (pos_ < text_.size() && text_[pos_] == 'i' &&
        (pos_ + 1 == text_.size() || !std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])))) {
      ++pos_;
      return cd(0.0, v) * identity();
    }
    return v * identity();
  }

  int integer() {
    skip();
    const std::size_t start = pos_;
    if (peek('-') || peek('+')) ++pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    int v = 0;
    const char *b = text_.data() + start;
    if (*b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) fail("expected an integer");
    return v;
  }

  std::size_t spin_ref() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                                   text_[pos_] == '\''))
      ++pos_;
    const std::string ref(text_.substr(start, pos_ - start));
    const auto idx = sys_.find(ref);
    if (!idx) fail("unknown spin '" + ref + "'");
    return *idx;
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return std::string(text_.substr(start, pos_ - start));
  }

  cx_mat identity() const { return cx_mat::Identity(dim_, dim_); }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek(char c) const { return pos_ < text_.size() && text_[pos_] == c; }
  void expect(char c) {
    skip();
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string &msg) const {
    throw ParseError("state expression '" + std::string(text_) + "', position " + std::to_string(pos_ + 1) + ": " +
                     msg);
  }

  std::string_view text_;
  const SpinSystem &sys_;
  std::vector<int> mult_;
  Eigen::Index dim_ = 0;
  std::size_t pos_ = 0;
};

ProductBasis basis_from_header(const std::string &value) {
  std::vector<int> mult;
  for (const auto &tok : split(value, ','))
    mult.push_back(static_cast<int>(parse_int(tok, "trajectory header 'multiplicities'")));
  try {
    return ProductBasis(mult);
  } catch (const DomainError &e) {
    throw ParseError(std::string("trajectory header: ") + e.what());
  }
}

std::pair<std::string, std::string> header_field(const std::string &line) {
  // "# key=value"
  const auto body = trim(std::string_view(line).substr(1));
  const auto eq = body.find('=');
  if (eq == std::string::npos) return {body, ""};
  return {trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1))};
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::optional<int> isotope_multiplicity(const std::string &isotope) {
  static const std::map<std::string, int> table = {
      {"1H", 2}, {"2H", 3}, {"13C", 2}, {"14N", 3}, {"15N", 2}, {"17O", 6}, {"19F", 2}, {"29Si", 2},
      {"31P", 2}, {"E", 2}, {"7Li", 4}, {"23Na", 4}, {"27Al", 6}, {"11B", 4}, {"6Li", 3}};
  const auto it = table.find(isotope);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

SpinSystem parse_system(std::string_view text) {
  return system_from_yaml(load_yaml(text));
}

std::string serialize_system(const SpinSystem &sys) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap << YAML::Key << "spins" << YAML::Value << YAML::BeginSeq;
  for (const auto &s : sys.spins) {
    out << YAML::Flow << YAML::BeginMap;
    if (!s.name.empty()) out << YAML::Key << "name" << YAML::Value << s.name;
    out << YAML::Key << "isotope" << YAML::Value << s.isotope;
    out << YAML::Key << "multiplicity" << YAML::Value << s.multiplicity;
    out << YAML::Key << "offset_hz" << YAML::Value << s.offset_hz;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  if (!sys.couplings.empty()) {
    out << YAML::Key << "couplings" << YAML::Value << YAML::BeginSeq;
    for (const auto &c : sys.couplings) {
      out << YAML::Flow << YAML::BeginMap;
      out << YAML::Key << "between" << YAML::Value << YAML::Flow << YAML::BeginSeq << c.i << c.j << YAML::EndSeq;
      out << YAML::Key << "j_hz" << YAML::Value << c.j_hz;
      out << YAML::Key << "model" << YAML::Value << (c.model == CouplingModel::weak ? "weak" : "strong");
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  if (!sys.quadrupolar.empty()) {
    out << YAML::Key << "quadrupolar" << YAML::Value << YAML::BeginSeq;
    for (const auto &q : sys.quadrupolar) {
      out << YAML::Flow << YAML::BeginMap;
      out << YAML::Key << "spin" << YAML::Value << q.spin;
      out << YAML::Key << "omega_q_hz" << YAML::Value << q.omega_q_hz;
      out << YAML::Key << "eta" << YAML::Value << q.eta;
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

ControlSet read_waveform(std::string_view text) {
  ControlSet cs;
  bool have_dt = false, have_power = false, have_channels = false;
  std::vector<std::vector<double>> rows;
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto &line = lines[ln];
    const std::string loc = "waveform line " + std::to_string(ln + 1);
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto [key, value] = header_field(t);
      if (key == "dt") {
        cs.dt = parse_double(value, loc);
        have_dt = true;
      } else if (key == "power_hz") {
        cs.power_hz = parse_double(value, loc);
        have_power = true;
      } else if (key == "channels") {
        for (const auto &item : split(value, ',')) {
          const auto parts = split(item, ':');
          if (parts.size() != 2 || parts[0].empty() || (parts[1] != "x" && parts[1] != "y"))
            throw ParseError(loc + ": channel '" + item + "' must look like isotope:x or isotope:y");
          cs.channels.push_back({parts[0], parts[1] == "x" ? Axis::x : Axis::y});
        }
        have_channels = true;
      }
      continue;
    }
    if (!have_channels) throw ParseError(loc + ": data row before the channels header");
    const auto toks = tokens_of(t);
    if (toks.size() != cs.channels.size())
      throw ParseError(loc + ": expected " + std::to_string(cs.channels.size()) + " values, found " +
                       std::to_string(toks.size()));
    std::vector<double> row;
    for (const auto &tok : toks) row.push_back(parse_double(tok, loc));
    rows.push_back(std::move(row));
  }
  if (!have_dt) throw ParseError("waveform: missing '# dt=' header");
  if (!have_power) throw ParseError("waveform: missing '# power_hz=' header");
  if (!have_channels) throw ParseError("waveform: missing '# channels=' header");
  if (rows.empty()) throw ParseError("waveform: no time steps (at least one row required)");
  if (!(cs.dt > 0.0)) throw ParseError("waveform: dt must be positive");
  cs.amplitudes.resize(static_cast<Eigen::Index>(cs.channels.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t n = 0; n < rows.size(); ++n)
    for (std::size_t k = 0; k < cs.channels.size(); ++k)
      cs.amplitudes(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) = rows[n][k];
  return cs;
}

std::string write_waveform(const ControlSet &controls) {
  validate(controls);
  std::string out;
  out += "# dt=" + format_double(controls.dt) + "\n";
  out += "# power_hz=" + format_double(controls.power_hz) + "\n";
  out += "# channels=";
  for (std::size_t k = 0; k < controls.channels.size(); ++k) {
    if (k) out += ',';
    out += to_string(controls.channels[k]);
  }
  out += '\n';
  for (Eigen::Index n = 0; n < controls.amplitudes.cols(); ++n) {
    for (Eigen::Index k = 0; k < controls.amplitudes.rows(); ++k) {
      if (k) out += ' ';
      out += format_double(controls.amplitudes(k, n));
    }
    out += '\n';
  }
  return out;
}

std::string write_trajectory(const Trajectory &traj) {
  if (!traj.basis) throw DomainError("trajectory has no basis");
  const auto &basis = *traj.basis;
  std::string out = "# spintraj-trajectory 1\n# multiplicities=";
  for (std::size_t k = 0; k < basis.multiplicities().size(); ++k) {
    if (k) out += ',';
    out += std::to_string(basis.multiplicities()[k]);
  }
  out += "\n# dim=" + std::to_string(basis.size()) + "\n# points=" + std::to_string(traj.points()) + "\n";
  out += "# system_hash=" + traj.system_hash + "\n# control_hash=" + traj.control_hash + "\n";
  for (std::size_t i = 0; i < basis.size(); ++i) {
    out += "# label " + std::to_string(i);
    for (const auto &c : basis.label(i).components) out += ' ' + std::to_string(c.l) + ',' + std::to_string(c.m);
    out += '\n';
  }
  for (std::size_t t = 0; t < traj.points(); ++t) {
    out += format_double(traj.times[t]);
    for (Eigen::Index i = 0; i < traj.states[t].size(); ++i) {
      out += ' ';
      out += format_double(traj.states[t][i].real());
      out += ' ';
      out += format_double(traj.states[t][i].imag());
    }
    out += '\n';
  }
  return out;
}

Trajectory read_trajectory(std::string_view text, const ProductBasis *expected) {
  const auto lines = lines_of(text);
  if (lines.empty() || trim(lines[0]) != "# spintraj-trajectory 1") throw ParseError("not a spintraj trajectory file");
  std::optional<ProductBasis> basis;
  std::size_t declared_points = 0, declared_dim = 0, next_label = 0;
  Trajectory traj;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const auto t = trim(lines[ln]);
    const std::string loc = "trajectory line " + std::to_string(ln + 1);
    if (t.empty()) continue;
    if (t[0] == '#') {
      if (t.rfind("# label", 0) == 0) {
        if (!basis) throw ParseError(loc + ": label before multiplicities header");
        const auto toks = tokens_of(t.substr(7));
        if (toks.size() != basis->spins() + 1) throw ParseError(loc + ": malformed label row");
        const auto idx = static_cast<std::size_t>(parse_int(toks[0], loc));
        BasisLabel label;
        for (std::size_t k = 1; k < toks.size(); ++k) {
          const auto lm = split(toks[k], ',');
          if (lm.size() != 2) throw ParseError(loc + ": malformed (l,m) pair '" + toks[k] + "'");
          label.components.push_back(
              {static_cast<int>(parse_int(lm[0], loc)), static_cast<int>(parse_int(lm[1], loc))});
        }
        if (idx != next_label || idx >= basis->size() || !(basis->label(idx) == label))
          throw ParseError(loc + ": basis label mapping mismatch at index " + std::to_string(idx) + " (" +
                           to_string(label) + ")");
        ++next_label;
        continue;
      }
      const auto [key, value] = header_field(t);
      if (key == "multiplicities") {
        basis = basis_from_header(value);
        if (expected && !(*expected == *basis))
          throw ParseError(loc + ": trajectory multiplicities do not match the spin system");
      } else if (key == "dim") {
        declared_dim = static_cast<std::size_t>(parse_int(value, loc));
      } else if (key == "points") {
        declared_points = static_cast<std::size_t>(parse_int(value, loc));
      } else if (key == "system_hash") {
        traj.system_hash = value;
      } else if (key == "control_hash") {
        traj.control_hash = value;
      }
      continue;
    }
    if (!basis || next_label != basis->size())
      throw ParseError(loc + ": data before a complete basis label table");
    const auto toks = tokens_of(t);
    if (toks.size() != 1 + 2 * basis->size())
      throw ParseError(loc + ": expected " + std::to_string(1 + 2 * basis->size()) + " values, found " +
                       std::to_string(toks.size()));
    traj.times.push_back(parse_double(toks[0], loc));
    StateVector s(static_cast<Eigen::Index>(basis->size()));
    for (std::size_t i = 0; i < basis->size(); ++i)
      s[static_cast<Eigen::Index>(i)] = cd(parse_double(toks[1 + 2 * i], loc), parse_double(toks[2 + 2 * i], loc));
    traj.states.push_back(std::move(s));
  }
  if (!basis) throw ParseError("trajectory: missing multiplicities header");
  if (declared_dim != basis->size()) throw ParseError("trajectory: dim header disagrees with multiplicities");
  if (declared_points != traj.states.size())
    throw ParseError("trajectory: points header says " + std::to_string(declared_points) + ", file has " +
                     std::to_string(traj.states.size()));
  if (traj.states.empty()) throw ParseError("trajectory: no time points");
  for (std::size_t t = 1; t < traj.times.size(); ++t)
    if (!(traj.times[t] > traj.times[t - 1])) throw ParseError("trajectory: times must increase strictly");
  traj.basis = std::make_shared<const ProductBasis>(std::move(*basis));
  return traj;
}

ParsedState parse_state(std::string_view expression, const SpinSystem &sys) {
  validate(sys);
  const cx_mat op = StateParser(expression, sys).parse();
  const ProductBasis basis(sys.multiplicities());
  ParsedState out;
  out.coefficients = to_liouville(basis, op);
  out.raw_norm = out.coefficients.norm();
  if (!(out.raw_norm > 0.0)) throw ParseError("state expression '" + std::string(expression) + "' has zero norm");
  out.renormalized = std::abs(out.raw_norm - 1.0) > 1e-12;
  out.coefficients /= out.raw_norm;
  return out;
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path &base_dir) {
  const auto root = load_yaml(text);
  if (!root.IsMap()) throw ParseError("experiment config must be a mapping");
  reject_unknown(root, {"system", "seed", "output", "problem", "analysis"}, "experiment config");
  ExperimentConfig cfg;

  const auto sys = required(root, "system");
  if (sys.IsScalar()) {
    const auto path = base_dir / scalar<std::string>(sys, "system");
    cfg.system = parse_system(read_file(path));
  } else {
    cfg.system = system_from_yaml(sys);
  }
  if (root["seed"]) cfg.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (root["output"]) cfg.output_dir = (base_dir / scalar<std::string>(root["output"], "output")).string();

  const auto problem = required(root, "problem");
  reject_unknown(problem,
                 {"initial", "target", "steps", "duration_s", "dt_s", "power_hz", "channels", "parametrization",
                  "initial_guess", "ensemble", "power_penalty", "max_iterations", "tolerance", "gradient"},
                 "problem block");
  cfg.initial = scalar<std::string>(required(problem, "initial"), "initial");
  cfg.target = scalar<std::string>(required(problem, "target"), "target");
  const auto steps_node = required(problem, "steps");
  const auto steps = scalar<long long>(steps_node, "steps");
  if (steps < 1) throw ParseError(where(steps_node, "steps") + ": at least one step required");
  if (problem["dt_s"] && problem["duration_s"])
    throw ParseError(where(problem, "dt_s") + ": give either dt_s or duration_s, not both");
  if (problem["dt_s"]) cfg.shape.dt = finite_scalar(problem["dt_s"], "dt_s");
  else cfg.shape.dt = finite_scalar(required(problem, "duration_s"), "duration_s") / static_cast<double>(steps);
  if (!(cfg.shape.dt > 0.0)) throw ParseError(where(problem, "dt_s") + ": time step must be positive");
  cfg.shape.power_hz = finite_scalar(required(problem, "power_hz"), "power_hz");
  const auto channels = required(problem, "channels");
  if (!channels.IsSequence() || channels.size() == 0)
    throw ParseError(where(channels, "channels") + ": expected a non-empty list like [1H:x, 1H:y]");
  for (const auto &ch : channels) {
    const auto parts = split(scalar<std::string>(ch, "channels"), ':');
    if (parts.size() != 2 || (parts[1] != "x" && parts[1] != "y"))
      throw ParseError(where(ch, "channels") + ": channel must look like isotope:x or isotope:y");
    cfg.shape.channels.push_back({parts[0], parts[1] == "x" ? Axis::x : Axis::y});
  }
  cfg.shape.amplitudes = mat::Zero(static_cast<Eigen::Index>(cfg.shape.channels.size()), steps);

  const auto param = optional_scalar<std::string>(problem, "parametrization", "amplitudes");
  if (param == "amplitudes") cfg.parametrization = Parametrization::amplitudes;
  else if (param == "phases") cfg.parametrization = Parametrization::phases;
  else throw ParseError(where(problem["parametrization"], "parametrization") + ": expected amplitudes or phases");
  if (problem["initial_guess"])
    cfg.initial_waveform = (base_dir / scalar<std::string>(problem["initial_guess"], "initial_guess")).string();

  if (const auto ens = problem["ensemble"]) {
    reject_unknown(ens, {"isotope", "offsets_hz", "power_scales"}, "ensemble block");
    cfg.ensemble.isotope = optional_scalar<std::string>(ens, "isotope", "");
    auto read_list = [&](const char *field, std::vector<double> &dst) {
      const auto node = ens[field];
      if (!node) return;
      dst.clear();
      if (node.IsSequence()) {
        for (const auto &v : node) dst.push_back(finite_scalar(v, field));
      } else if (node.IsMap()) {
        reject_unknown(node, {"from", "to", "count"}, field);
        const double from = finite_scalar(required(node, "from"), "from");
        const double to = finite_scalar(required(node, "to"), "to");
        const auto count = scalar<long long>(required(node, "count"), "count");
        if (count < 1) throw ParseError(where(node, field) + ": count must be positive");
        for (long long i = 0; i < count; ++i)
          dst.push_back(count == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(count - 1));
      } else {
        throw ParseError(where(node, field) + ": expected a list or {from, to, count}");
      }
      if (dst.empty()) throw ParseError(where(node, field) + ": list must be non-empty");
    };
    read_list("offsets_hz", cfg.ensemble.offsets_hz);
    read_list("power_scales", cfg.ensemble.power_scales);
  }
  cfg.power_penalty = optional_scalar<double>(problem, "power_penalty", 0.0);
  cfg.max_iterations = optional_scalar<int>(problem, "max_iterations", 1000);
  cfg.tolerance = optional_scalar<double>(problem, "tolerance", 1e-6);
  const auto grad = optional_scalar<std::string>(problem, "gradient", "exact");
  if (grad == "exact") cfg.gradient_mode = GradientMode::exact;
  else if (grad == "first_order") cfg.gradient_mode = GradientMode::first_order;
  else throw ParseError(where(problem["gradient"], "gradient") + ": expected exact or first_order");

  if (const auto analysis = root["analysis"]) {
    reject_unknown(analysis, {"specs", "compare", "involvement_threshold"}, "analysis block");
    if (const auto specs = analysis["specs"]) {
      for (const auto &s : specs) {
        const auto name = scalar<std::string>(s, "specs");
        try {
          (void)parse_family(name);
        } catch (const DomainError &e) {
          throw ParseError(where(s, "specs") + ": " + e.what());
        }
        cfg.analysis_specs.push_back(name);
      }
    }
    if (const auto compare = analysis["compare"]) {
      for (const auto &c : compare) {
        reject_unknown(c, {"trajectory", "score", "grouping"}, "comparison");
        Comparison cmp;
        cmp.trajectory = (base_dir / scalar<std::string>(required(c, "trajectory"), "trajectory")).string();
        try {
          cmp.score = parse_score(optional_scalar<std::string>(c, "score", "rsp"));
          cmp.grouping = parse_grouping(optional_scalar<std::string>(c, "grouping", "none"));
        } catch (const DomainError &e) {
          throw ParseError(where(c, "compare") + ": " + e.what());
        }
        cfg.comparisons.push_back(cmp);
      }
    }
    cfg.involvement_threshold = optional_scalar<double>(analysis, "involvement_threshold", 0.05);
  }
  return cfg;
}

std::string series_csv(const std::vector<double> &times, const std::vector<std::string> &names,
                       const std::vector<std::vector<double>> &columns) {
  if (names.size() != columns.size()) throw DomainError("one name per CSV column required");
  for (const auto &c : columns)
    if (c.size() != times.size()) throw DomainError("CSV column length differs from the time axis");
  std::string out = "time";
  for (const auto &n : names) out += ',' + n;
  out += '\n';
  for (std::size_t t = 0; t < times.size(); ++t) {
    out += format_double(times[t]);
    for (const auto &c : columns) out += ',' + format_double(c[t]);
    out += '\n';
  }
  return out;
}

std::string family_csv(const Trajectory &traj, ProjectorFamily family) {
  if (!traj.basis) throw DomainError("trajectory has no basis");
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  for (const auto &p : projector_family(*traj.basis, family)) {
    names.push_back(p.name);
    cols.push_back(population_series(p, traj));
  }
  return series_csv(traj.times, names, cols);
}

std::string similarity_csv(const SimilarityReport &report) {
  const std::string score = to_string(report.kind);
  if (report.kind == ScoreKind::rsp && report.grouping == Grouping::none)
    return series_csv(report.times, {"rsp_re", "rsp_abs"}, {report.real(), report.magnitude()});
  const std::string name = report.grouping == Grouping::none ? score : to_string(report.grouping) + "_" + score;
  return series_csv(report.times, {name}, {report.real()});
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path &path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

ProjectorFamily parse_family(const std::string &name) {
  if (name == "corr-orders") return ProjectorFamily::corr_orders;
  if (name == "coh-orders") return ProjectorFamily::coh_orders;
  if (name == "local") return ProjectorFamily::local;
  if (name == "involvement") return ProjectorFamily::involvement;
  throw DomainError("unknown analysis spec '" + name + "' (corr-orders, coh-orders, local, involvement)");
}

Grouping parse_grouping(const std::string &name) {
  if (name == "none") return Grouping::none;
  if (name == "sg") return Grouping::sg;
  if (name == "bsg") return Grouping::bsg;
  throw DomainError("unknown grouping '" + name + "' (none, sg, bsg)");
}

ScoreKind parse_score(const std::string &name) {
  if (name == "rsp") return ScoreKind::rsp;
  if (name == "rdn") return ScoreKind::rdn;
  throw DomainError("unknown score '" + name + "' (rsp, rdn)");
}

}  // namespace spintraj::io
