#include "gpebo/scenario_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gpebo/format.hpp"

namespace gpebo {

namespace {

struct Value {
  enum class Kind { Scalar, Array, Record };
  Kind kind = Kind::Scalar;
  std::string text;  // raw token for scalars
  std::vector<Value> items;
  std::vector<std::pair<std::string, Value>> fields;
};

class ValueParser {
 public:
  ValueParser(std::string_view s, const std::string& key, std::size_t line)
      : s_(s), key_(key), line_(line) {}

  Value parse_all() {
    Value v = parse();
    skip_ws();
    if (pos_ != s_.size()) {
      fail("unexpected trailing text '" + std::string(s_.substr(pos_)) + "'");
    }
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ScenarioParseError(key_, line_, msg); }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Value parse() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    if (s_[pos_] == '[') return parse_array();
    if (s_[pos_] == '{') return parse_record();
    return parse_scalar();
  }

  Value parse_array() {
    ++pos_;
    Value v;
    v.kind = Value::Kind::Array;
    if (consume(']')) return v;
    while (true) {
      v.items.push_back(parse());
      if (consume(']')) return v;
      if (!consume(',')) fail("expected ',' or ']' in array");
    }
  }

  Value parse_record() {
    ++pos_;
    Value v;
    v.kind = Value::Kind::Record;
    if (consume('}')) return v;
    while (true) {
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < s_.size() && s_[pos_] != '=' && s_[pos_] != ',' && s_[pos_] != '}' &&
             s_[pos_] != ' ' && s_[pos_] != '\t') {
        ++pos_;
      }
      std::string name(s_.substr(start, pos_ - start));
      if (name.empty()) fail("empty field name in record");
      if (!consume('=')) fail("expected '=' after record field '" + name + "'");
      v.fields.emplace_back(std::move(name), parse());
      if (consume('}')) return v;
      if (!consume(',')) fail("expected ',' or '}' in record");
    }
  }

  Value parse_scalar() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '}' &&
           s_[pos_] != ' ' && s_[pos_] != '\t') {
      ++pos_;
    }
    Value v;
    v.text = std::string(s_.substr(start, pos_ - start));
    if (v.text.empty()) fail("empty value");
    return v;
  }

  std::string_view s_;
  std::string key_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

struct Entry {
  std::string key;
  std::size_t line;
  Value value;
};

class Reader {
 public:
  explicit Reader(const Entry& e) : e_(e) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ScenarioParseError(e_.key, e_.line, msg);
  }

  double number(const Value& v) const {
    if (v.kind != Value::Kind::Scalar) fail("expected a number");
    double out = 0.0;
    const char* b = v.text.data();
    const char* end = b + v.text.size();
    if (*b == '+') ++b;
    const auto res = std::from_chars(b, end, out);
    if (res.ec != std::errc() || res.ptr != end) fail("'" + v.text + "' is not a number");
    return out;
  }
  double number() const { return number(e_.value); }

  std::uint64_t unsigned_integer(const Value& v) const {
    if (v.kind != Value::Kind::Scalar) fail("expected a non-negative integer");
    std::uint64_t out = 0;
    const char* end = v.text.data() + v.text.size();
    const auto res = std::from_chars(v.text.data(), end, out);
    if (res.ec != std::errc() || res.ptr != end) {
      fail("'" + v.text + "' is not a non-negative integer");
    }
    return out;
  }
  std::size_t size() const { return static_cast<std::size_t>(unsigned_integer(e_.value)); }

  Vector vector(const Value& v) const {
    if (v.kind != Value::Kind::Array) fail("expected an array");
    Vector out;
    for (const auto& item : v.items) out.push_back(number(item));
    return out;
  }
  Vector vector() const { return vector(e_.value); }

  Matrix matrix() const {
    const Value& v = e_.value;
    if (v.kind != Value::Kind::Array || v.items.empty()) fail("expected a nested array matrix");
    std::vector<double> data;
    std::size_t cols = 0;
    for (std::size_t r = 0; r < v.items.size(); ++r) {
      const Vector row = vector(v.items[r]);
      if (r == 0) {
        cols = row.size();
        if (cols == 0) fail("matrix rows must be nonempty");
      } else if (row.size() != cols) {
        fail("ragged matrix: row " + std::to_string(r + 1) + " has " +
             std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
      }
      data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(v.items.size(), cols, std::move(data));
  }

  std::map<std::string, double> record(const std::set<std::string>& allowed) const {
    const Value& v = e_.value;
    if (v.kind != Value::Kind::Record) fail("expected a {name=value, ...} record");
    std::map<std::string, double> out;
    for (const auto& [name, val] : v.fields) {
      if (!allowed.count(name)) fail("unknown record field '" + name + "'");
      if (!out.emplace(name, number(val)).second) fail("duplicate record field '" + name + "'");
    }
    return out;
  }

  std::string word() const {
    if (e_.value.kind != Value::Kind::Scalar) fail("expected a bare word");
    return e_.value.text;
  }

 private:
  const Entry& e_;
};

std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    parts.push_back(key.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return parts;
}

std::size_t index_part(const Reader& r, const std::string& s) {
  std::size_t out = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || out == 0) {
    r.fail("index '" + s + "' must be a positive integer");
  }
  return out;
}

struct TvEntry {
  std::size_t i, j;
  SinusoidEntry value;
  Entry source;
};

double field_or_zero(const std::map<std::string, double>& rec, const std::string& name) {
  const auto it = rec.find(name);
  return it == rec.end() ? 0.0 : it->second;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  std::vector<Entry> entries;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) {
      line.remove_suffix(1);
    }
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ScenarioParseError(std::string(line), line_no, "expected 'key = value'");
    }
    std::string key(line.substr(0, eq));
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    if (key.empty()) throw ScenarioParseError("", line_no, "empty key");
    if (!seen.insert(key).second) throw ScenarioParseError(key, line_no, "duplicate key");
    Value v = ValueParser(line.substr(eq + 1), key, line_no).parse_all();
    entries.push_back({std::move(key), line_no, std::move(v)});
  }

  Scenario sc;
  sc.name.clear();
  std::vector<TvEntry> a_theta;
  std::vector<TvEntry> a_b;
  std::map<std::size_t, std::pair<SineTerm, Entry>> sines;
  std::set<std::string> provided;

  for (const Entry& e : entries) {
    const Reader r(e);
    const std::string& k = e.key;
    const auto parts = split_key(k);
    provided.insert(k);
    if (k == "name") sc.name = r.word();
    else if (k == "dims.n") sc.dims.n = r.size();
    else if (k == "dims.n_theta") sc.dims.n_theta = r.size();
    else if (k == "dims.n_B") sc.dims.n_B = r.size();
    else if (k == "dims.n_w") sc.dims.n_w = r.size();
    else if (k == "dims.n_Gamma") sc.dims.n_Gamma = r.size();
    else if (k == "h_theta") sc.h_theta = r.matrix();
    else if (k == "h_B") sc.h_B = r.matrix();
    else if (k == "S") sc.S = r.matrix();
    else if (k == "h_delta") sc.h_delta = r.vector();
    else if (k == "C_Gamma") sc.C_Gamma = r.matrix();
    else if (k == "eta") sc.eta = r.vector();
    else if (k == "rho.readout") {
      if (e.value.kind != Value::Kind::Array) r.fail("expected an array of 1-based indices");
      for (const auto& item : e.value.items) {
        sc.rho_readout.push_back(static_cast<std::size_t>(r.unsigned_integer(item)));
      }
    } else if (k == "initial.x") sc.initial.x = r.vector();
    else if (k == "initial.x_theta") sc.initial.x_theta = r.vector();
    else if (k == "initial.x_B") sc.initial.x_B = r.vector();
    else if (k == "initial.w") sc.initial.w = r.vector();
    else if (k == "input.u.const") sc.input.constant = r.number();
    else if (k == "gains.K") sc.gains.K = r.vector();
    else if (k == "gains.f") sc.gains.f = r.vector();
    else if (k == "gains.f0") sc.gains.f0 = r.number();
    else if (k == "gains.alpha") sc.gains.alpha = r.number();
    else if (k == "gains.gamma") sc.gains.gamma = r.number();
    else if (k == "noise.amplitude") sc.noise.amplitude = r.number();
    else if (k == "noise.seed") sc.noise.seed = r.unsigned_integer(e.value);
    else if (k == "estimator.theta_g0") sc.theta_g0 = r.vector();
    else if (k == "estimator.theta0") sc.theta0 = r.vector();
    else if (k == "sim.t_final") sc.sim.t_final = r.number();
    else if (k == "sim.dt") sc.sim.dt = r.number();
    else if (k == "sim.record_stride") sc.sim.record_stride = r.size();
    else if (k == "verify.window") {
      const Vector w = r.vector();
      if (w.size() != 2) r.fail("expected [start, end]");
      sc.verify.window_start = w[0];
      sc.verify.window_end = w[1];
    } else if (k == "verify.terminal_floor") sc.verify.terminal_floor = r.number();
    else if ((parts[0] == "A_theta" || parts[0] == "A_B") && parts.size() == 4 &&
             parts[1] == "entry") {
      const auto rec = r.record({"a", "b", "omega", "phase"});
      TvEntry tv{index_part(r, parts[2]), index_part(r, parts[3]),
                 {field_or_zero(rec, "a"), field_or_zero(rec, "b"), field_or_zero(rec, "omega"),
                  field_or_zero(rec, "phase")},
                 e};
      (parts[0] == "A_theta" ? a_theta : a_b).push_back(std::move(tv));
    } else if (parts.size() == 4 && parts[0] == "input" && parts[1] == "u" && parts[2] == "sin") {
      const auto rec = r.record({"amp", "omega", "phase"});
      sines.emplace(index_part(r, parts[3]),
                    std::make_pair(SineTerm{field_or_zero(rec, "amp"), field_or_zero(rec, "omega"),
                                            field_or_zero(rec, "phase")},
                                   e));
    } else {
      r.fail("unknown key");
    }
  }

  for (const char* req : {"dims.n", "dims.n_theta", "dims.n_B", "dims.n_w", "dims.n_Gamma",
                          "h_theta", "h_B", "S", "h_delta", "C_Gamma", "eta", "initial.x",
                          "initial.x_theta", "initial.x_B", "initial.w", "gains.K", "gains.f",
                          "gains.f0", "gains.alpha", "gains.gamma"}) {
    if (!provided.count(req)) throw ScenarioParseError(req, 0, "required key missing");
  }

  const auto place = [](TimeVaryingMatrix& m, std::size_t dim, const std::vector<TvEntry>& list) {
    m = TimeVaryingMatrix(dim, dim);
    for (const auto& tv : list) {
      if (tv.i > dim || tv.j > dim) {
        Reader(tv.source).fail("entry index outside " + std::to_string(dim) + "x" +
                               std::to_string(dim));
      }
      m.entry(tv.i - 1, tv.j - 1) = tv.value;
    }
  };
  place(sc.A_theta, sc.dims.n_theta, a_theta);
  place(sc.A_B, sc.dims.n_B, a_b);

  std::size_t expect = 1;
  for (const auto& [idx, term] : sines) {
    if (idx != expect) {
      Reader(term.second).fail("sinusoid terms must be numbered 1, 2, ... without gaps");
    }
    sc.input.terms.push_back(term.first);
    ++expect;
  }
  return sc;
}

namespace {

std::string matrix_text(const Matrix& m) {
  std::string out = "[";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (i) out += ", ";
    out += format_array(m.row(i));
  }
  return out + "]";
}

void write_tv(std::ostringstream& os, const std::string& name, const TimeVaryingMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const auto& e = m.entry(i, j);
      if (e == SinusoidEntry{}) continue;
      os << name << ".entry." << i + 1 << '.' << j + 1 << " = {a=" << format_double(e.offset)
         << ", b=" << format_double(e.amplitude) << ", omega=" << format_double(e.omega)
         << ", phase=" << format_double(e.phase) << "}\n";
    }
  }
}

}  // namespace

std::string format_scenario(const Scenario& sc) {
  std::ostringstream os;
  if (!sc.name.empty()) os << "name = " << sc.name << "\n\n";
  os << "dims.n = " << sc.dims.n << '\n'
     << "dims.n_theta = " << sc.dims.n_theta << '\n'
     << "dims.n_B = " << sc.dims.n_B << '\n'
     << "dims.n_w = " << sc.dims.n_w << '\n'
     << "dims.n_Gamma = " << sc.dims.n_Gamma << "\n\n";
  os << "# entries are a + b*sin(omega*t + phase); omitted entries are zero\n";
  write_tv(os, "A_theta", sc.A_theta);
  write_tv(os, "A_B", sc.A_B);
  os << "h_theta = " << matrix_text(sc.h_theta) << '\n'
     << "h_B = " << matrix_text(sc.h_B) << "\n\n";
  os << "S = " << matrix_text(sc.S) << '\n'
     << "h_delta = " << format_array(sc.h_delta) << '\n'
     << "C_Gamma = " << matrix_text(sc.C_Gamma) << '\n'
     << "eta = " << format_array(sc.eta) << '\n';
  if (!sc.rho_readout.empty()) {
    os << "rho.readout = [";
    for (std::size_t i = 0; i < sc.rho_readout.size(); ++i) {
      os << (i ? ", " : "") << sc.rho_readout[i];
    }
    os << "]\n";
  }
  os << '\n'
     << "initial.x = " << format_array(sc.initial.x) << '\n'
     << "initial.x_theta = " << format_array(sc.initial.x_theta) << '\n'
     << "initial.x_B = " << format_array(sc.initial.x_B) << '\n'
     << "initial.w = " << format_array(sc.initial.w) << "\n\n";
  os << "input.u.const = " << format_double(sc.input.constant) << '\n';
  for (std::size_t i = 0; i < sc.input.terms.size(); ++i) {
    const auto& t = sc.input.terms[i];
    os << "input.u.sin." << i + 1 << " = {amp=" << format_double(t.amplitude)
       << ", omega=" << format_double(t.omega) << ", phase=" << format_double(t.phase) << "}\n";
  }
  os << '\n'
     << "gains.K = " << format_array(sc.gains.K) << '\n'
     << "gains.f = " << format_array(sc.gains.f) << '\n'
     << "gains.f0 = " << format_double(sc.gains.f0) << '\n'
     << "gains.alpha = " << format_double(sc.gains.alpha) << '\n'
     << "gains.gamma = " << format_double(sc.gains.gamma) << "\n\n";
  os << "noise.amplitude = " << format_double(sc.noise.amplitude) << '\n'
     << "noise.seed = " << sc.noise.seed << '\n';
  if (sc.theta_g0) os << "estimator.theta_g0 = " << format_array(*sc.theta_g0) << '\n';
  if (sc.theta0) os << "estimator.theta0 = " << format_array(*sc.theta0) << '\n';
  os << '\n'
     << "sim.t_final = " << format_double(sc.sim.t_final) << '\n'
     << "sim.dt = " << format_double(sc.sim.dt) << '\n'
     << "sim.record_stride = " << sc.sim.record_stride << "\n\n";
  os << "verify.window = [" << format_double(sc.verify.window_start) << ", "
     << format_double(sc.verify.window_end) << "]\n"
     << "verify.terminal_floor = " << format_double(sc.verify.terminal_floor) << '\n';
  return os.str();
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open scenario file '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write scenario file '" + path.string() + "'");
  }
  out << format_scenario(sc);
  if (!out) {
    throw std::runtime_error("error writing scenario file '" + path.string() + "'");
  }
}

}  // namespace gpebo
