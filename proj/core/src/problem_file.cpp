#include "acyl/problem_file.hpp"

#include "acyl/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace acyl {

namespace {

enum class Tok { kIdent, kNumber, kLBracket, kRBracket, kLBrace, kRBrace, kLParen, kRParen, kEquals, kSemicolon, kComma, kEnd };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::kIdent: return "identifier";
    case Tok::kNumber: return "number";
    case Tok::kLBracket: return "'['";
    case Tok::kRBracket: return "']'";
    case Tok::kLBrace: return "'{'";
    case Tok::kRBrace: return "'}'";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kEquals: return "'='";
    case Tok::kSemicolon: return "';'";
    case Tok::kComma: return "','";
    case Tok::kEnd: return "end of file";
  }
  return "?";
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    const bool starts_number =
        std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
        ((c == '-' || c == '+') && i + 1 < src.size() &&
         (std::isdigit(static_cast<unsigned char>(src[i + 1])) || src[i + 1] == '.'));
    if (starts_number) {
      std::size_t j = i + 1;
      while (j < src.size()) {
        const char d = src[j];
        if (std::isdigit(static_cast<unsigned char>(d)) || d == '.') {
          ++j;
        } else if ((d == 'e' || d == 'E') && j + 1 < src.size()) {
          ++j;
          if (src[j] == '+' || src[j] == '-') ++j;
        } else {
          break;
        }
      }
      std::string_view text = src.substr(i, j - i);
      std::string_view digits = text;
      if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
      double v = 0.0;
      const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (res.ec != std::errc() || res.ptr != digits.data() + digits.size()) {
        throw ParseError("malformed number '" + std::string(text) + "'", line, col);
      }
      if (!std::isfinite(v)) throw ParseError("number out of range '" + std::string(text) + "'", line, col);
      t.kind = Tok::kNumber;
      t.text = std::string(text);
      t.number = v;
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i + 1;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::kIdent;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    switch (c) {
      case '[': t.kind = Tok::kLBracket; break;
      case ']': t.kind = Tok::kRBracket; break;
      case '{': t.kind = Tok::kLBrace; break;
      case '}': t.kind = Tok::kRBrace; break;
      case '(': t.kind = Tok::kLParen; break;
      case ')': t.kind = Tok::kRParen; break;
      case '=': t.kind = Tok::kEquals; break;
      case ';': t.kind = Tok::kSemicolon; break;
      case ',': t.kind = Tok::kComma; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    t.text = std::string(1, c);
    advance(1);
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::kEnd;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

struct Value {
  enum class Kind { kNumber, kMatrix, kCall, kList } kind = Kind::kNumber;
  double number = 0.0;
  Mat matrix;
  std::string name;
  std::vector<Value> args;
  int line = 1;
  int column = 1;
};

struct Entry {
  std::string key;
  Value value;
  int line = 1;
  int column = 1;
};

struct Item {
  std::string name;
  int line = 1;
  int column = 1;
  bool is_section = false;
  Value value;
  std::vector<Entry> entries;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<Item> items() {
    std::vector<Item> out;
    while (peek().kind != Tok::kEnd) {
      const Token& name = expect(Tok::kIdent);
      Item item;
      item.name = name.text;
      item.line = name.line;
      item.column = name.column;
      if (peek().kind == Tok::kLBrace) {
        next();
        item.is_section = true;
        while (peek().kind != Tok::kRBrace) {
          const Token& key = expect(Tok::kIdent);
          expect(Tok::kEquals);
          Entry e;
          e.key = key.text;
          e.line = key.line;
          e.column = key.column;
          e.value = value();
          item.entries.push_back(std::move(e));
          skip_separators();
        }
        next();
      } else {
        expect(Tok::kEquals);
        item.value = value();
      }
      skip_separators();
      out.push_back(std::move(item));
    }
    return out;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  const Token& expect(Tok kind) {
    const Token& t = peek();
    if (t.kind != kind) {
      throw ParseError(std::string("expected ") + describe(kind) + ", found " + describe(t.kind) +
                           (t.kind == Tok::kEnd ? "" : " '" + t.text + "'"),
                       t.line, t.column);
    }
    return next();
  }

  void skip_separators() {
    while (peek().kind == Tok::kSemicolon || peek().kind == Tok::kComma) next();
  }

  Value value() {
    const Token& t = peek();
    Value v;
    v.line = t.line;
    v.column = t.column;
    if (t.kind == Tok::kNumber) {
      v.kind = Value::Kind::kNumber;
      v.number = next().number;
      return v;
    }
    if (t.kind == Tok::kIdent) return call();
    if (t.kind != Tok::kLBracket) {
      throw ParseError(std::string("expected a value, found ") + describe(t.kind), t.line, t.column);
    }
    next();
    if (peek().kind == Tok::kIdent) {
      v.kind = Value::Kind::kList;
      for (;;) {
        v.args.push_back(call());
        if (peek().kind == Tok::kComma || peek().kind == Tok::kSemicolon) {
          next();
          continue;
        }
        break;
      }
      expect(Tok::kRBracket);
      return v;
    }
    v.kind = Value::Kind::kMatrix;
    std::vector<std::vector<double>> rows(1);
    std::vector<std::pair<int, int>> row_pos{{t.line, t.column}};
    for (;;) {
      const Token& e = peek();
      if (e.kind == Tok::kNumber) {
        rows.back().push_back(next().number);
      } else if (e.kind == Tok::kComma) {
        next();
      } else if (e.kind == Tok::kSemicolon) {
        next();
        rows.emplace_back();
        row_pos.emplace_back(peek().line, peek().column);
      } else if (e.kind == Tok::kRBracket) {
        next();
        break;
      } else {
        throw ParseError(std::string("unexpected ") + describe(e.kind) + " inside a matrix", e.line, e.column);
      }
    }
    if (rows.size() == 1 && rows[0].empty()) {
      v.matrix = Mat(0, 0);
      return v;
    }
    const std::size_t cols = rows[0].size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != cols || cols == 0) {
        throw ParseError("matrix row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                             " entries, expected " + std::to_string(cols),
                         row_pos[r].first, row_pos[r].second);
      }
    }
    v.matrix.resize(static_cast<Index>(rows.size()), static_cast<Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols; ++c) v.matrix(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    }
    return v;
  }

  Value call() {
    const Token& name = expect(Tok::kIdent);
    Value v;
    v.kind = Value::Kind::kCall;
    v.name = name.text;
    v.line = name.line;
    v.column = name.column;
    expect(Tok::kLParen);
    if (peek().kind != Tok::kRParen) {
      for (;;) {
        v.args.push_back(value());
        if (peek().kind == Tok::kComma) {
          next();
          continue;
        }
        break;
      }
    }
    expect(Tok::kRParen);
    return v;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

[[noreturn]] void fail(const Value& v, const std::string& msg) { throw ParseError(msg, v.line, v.column); }

double as_number(const Value& v, const std::string& what) {
  if (v.kind == Value::Kind::kNumber) return v.number;
  if (v.kind == Value::Kind::kMatrix && v.matrix.size() == 1) return v.matrix(0, 0);
  fail(v, what + " must be a number");
}

Index as_count(const Value& v, const std::string& what) {
  const double d = as_number(v, what);
  if (d < 0 || d != std::floor(d) || d > 1e6) fail(v, what + " must be a non-negative integer");
  return static_cast<Index>(d);
}

Mat as_matrix(const Value& v, const std::string& what) {
  switch (v.kind) {
    case Value::Kind::kNumber:
      return Mat::Constant(1, 1, v.number);
    case Value::Kind::kMatrix:
      return v.matrix;
    case Value::Kind::kCall:
      if (v.name == "zeros") {
        if (v.args.size() != 2) fail(v, "zeros takes (rows, cols)");
        return Mat::Zero(as_count(v.args[0], "rows"), as_count(v.args[1], "cols"));
      }
      if (v.name == "eye") {
        if (v.args.size() != 1) fail(v, "eye takes (n)");
        const Index n = as_count(v.args[0], "n");
        return Mat::Identity(n, n);
      }
      fail(v, "unknown matrix function '" + v.name + "' for " + what);
    case Value::Kind::kList:
      break;
  }
  fail(v, what + " must be a matrix");
}

std::vector<double> as_vector(const Value& v, const std::string& what) {
  const Mat m = as_matrix(v, what);
  if (m.rows() > 1 && m.cols() > 1) fail(v, what + " must be a row or column vector");
  return std::vector<double>(m.data(), m.data() + m.size());
}

SignalSpec as_signal(const Value& v) {
  if (v.kind != Value::Kind::kCall) fail(v, "a signal must be sine(...), square(...), constant(...) or sampled(...)");
  auto arity = [&](std::size_t n, const char* usage) {
    if (v.args.size() != n) fail(v, std::string("expected ") + usage);
  };
  try {
    if (v.name == "sine") {
      arity(2, "sine(amplitude, omega)");
      return SignalSpec::sine(as_number(v.args[0], "amplitude"), as_number(v.args[1], "omega"));
    }
    if (v.name == "square") {
      arity(3, "square(offset, amplitude, omega)");
      return SignalSpec::square(as_number(v.args[0], "offset"), as_number(v.args[1], "amplitude"),
                                as_number(v.args[2], "omega"));
    }
    if (v.name == "constant") {
      arity(1, "constant(value)");
      return SignalSpec::constant(as_number(v.args[0], "value"));
    }
    if (v.name == "sampled") {
      arity(2, "sampled([times], [values])");
      return SignalSpec::sampled(as_vector(v.args[0], "times"), as_vector(v.args[1], "values"));
    }
  } catch (const InvalidInputError& e) {
    fail(v, e.what());
  }
  fail(v, "unknown signal '" + v.name + "'");
}

// Collects the entries of one section, rejecting unknown and repeated keys.
class Section {
 public:
  Section(const Item& item, std::set<std::string> allowed) : item_(item) {
    if (!item.is_section) throw ParseError("'" + item.name + "' must be a { } section", item.line, item.column);
    for (const Entry& e : item.entries) {
      if (!allowed.count(e.key)) {
        throw ParseError("unknown key '" + e.key + "' in section '" + item.name + "'", e.line, e.column);
      }
      if (!values_.emplace(e.key, &e.value).second) {
        throw ParseError("key '" + e.key + "' given twice", e.line, e.column);
      }
    }
  }

  const Value* get(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : it->second;
  }

  Mat required(const std::string& key) const {
    const Value* v = get(key);
    if (!v) throw ParseError("section '" + item_.name + "' needs " + key, item_.line, item_.column);
    return as_matrix(*v, key);
  }

  std::optional<Mat> optional(const std::string& key) const {
    const Value* v = get(key);
    if (!v) return std::nullopt;
    return as_matrix(*v, key);
  }

 private:
  const Item& item_;
  std::map<std::string, const Value*> values_;
};

std::vector<Item> parse_items(std::string_view text) { return Parser(lex(text)).items(); }

void reject_duplicates(const std::vector<Item>& items) {
  std::set<std::string> seen;
  for (const Item& it : items) {
    if (!seen.insert(it.name).second) throw ParseError("'" + it.name + "' given twice", it.line, it.column);
  }
}

bool same(const Mat& a, const Mat& b) { return a.rows() == b.rows() && a.cols() == b.cols() && a == b; }

bool same_plant(const PlantModel& a, const PlantModel& b) {
  return same(a.A1, b.A1) && same(a.B1, b.B1) && same(a.C1, b.C1) && same(a.D1, b.D1) && same(a.E1, b.E1) &&
         same(a.F1, b.F1);
}

bool same_controller(const ControllerParams& a, const ControllerParams& b) {
  return same(a.A3, b.A3) && same(a.B3, b.B3) && same(a.C3, b.C3) && same(a.D3, b.D3) && same(a.E3, b.E3) &&
         same(a.F3, b.F3);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_row(const std::vector<double>& v) {
  return format_matrix(Eigen::Map<const Mat>(v.data(), 1, static_cast<Index>(v.size())));
}

std::string format_signal(const SignalSpec& s) {
  switch (s.kind()) {
    case SignalSpec::Kind::kSine:
      return "sine(" + format_number(s.amplitude()) + ", " + format_number(s.omega()) + ")";
    case SignalSpec::Kind::kSquareSgnSine:
      return "square(" + format_number(s.offset()) + ", " + format_number(s.amplitude()) + ", " +
             format_number(s.omega()) + ")";
    case SignalSpec::Kind::kConstant:
      return "constant(" + format_number(s.offset()) + ")";
    case SignalSpec::Kind::kSampled:
      return "sampled(" + format_row(s.times()) + ", " + format_row(s.values()) + ")";
  }
  return "";
}

}  // namespace

std::string format_matrix(const Mat& m) {
  if (m.rows() == 0 && m.cols() == 0) return "[]";
  if (m.rows() == 0 || m.cols() == 0) {
    return "zeros(" + std::to_string(m.rows()) + ", " + std::to_string(m.cols()) + ")";
  }
  std::string out = "[";
  for (Index i = 0; i < m.rows(); ++i) {
    if (i > 0) out += "; ";
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ' ';
      out += format_number(m(i, j));
    }
  }
  return out + "]";
}

Mat parse_matrix(std::string_view text) {
  const std::string prefix = "m = ";
  std::vector<Item> items;
  try {
    items = parse_items(prefix + std::string(text));
  } catch (const ParseError& e) {
    // report positions in the caller's text, not the wrapped one
    if (e.line() != 1) throw;
    const std::string what = e.what();
    const std::string message = what.substr(what.find(": ") + 2);
    throw ParseError(message, 1, std::max(1, e.column() - static_cast<int>(prefix.size())));
  }
  if (items.size() != 1 || items[0].is_section) throw ParseError("expected a single matrix value", 1, 1);
  return as_matrix(items[0].value, "matrix");
}

ProblemFile parse_problem(std::string_view text) {
  const std::vector<Item> items = parse_items(text);
  reject_duplicates(items);
  ProblemFile f;
  std::optional<Mat> k2, k3;

  for (const Item& item : items) {
    if (item.name == "system") {
      Section s(item, {"A", "B", "C"});
      f.system = SystemSection{s.required("A"), s.required("B"), s.required("C")};
    } else if (item.name == "plant") {
      Section s(item, {"A1", "B1", "C1", "D1", "E1", "F1"});
      PlantModel p;
      p.A1 = s.required("A1");
      p.B1 = s.required("B1");
      p.C1 = s.required("C1");
      p.D1 = s.required("D1");
      p.E1 = s.optional("E1").value_or(Mat::Zero(p.D1.rows(), p.B1.cols()));
      p.F1 = s.optional("F1").value_or(Mat::Zero(p.D1.rows(), p.C1.cols()));
      f.plant = std::move(p);
    } else if (item.name == "reference") {
      Section s(item, {"A2", "C2", "D2"});
      f.reference.A2 = s.required("A2");
      const Index a2 = f.reference.A2.rows();
      f.reference.C2 = s.optional("C2").value_or(Mat::Zero(a2, 0));
      f.reference.D2 = s.optional("D2").value_or(Mat::Zero(0, a2));
    } else if (item.name == "controller_order") {
      if (item.is_section) throw ParseError("controller_order is a number", item.line, item.column);
      f.controller_order = as_count(item.value, "controller_order");
    } else if (item.name == "target") {
      Section s(item, {"K1", "K2", "K3"});
      f.target = TargetSection{s.required("K1"), {}, {}};
      k2 = s.optional("K2");
      k3 = s.optional("K3");
    } else if (item.name == "bound") {
      Section s(item, {"G"});
      const Value* gv = s.get("G");
      const Mat g = s.required("G");
      try {
        f.G = SymMat(g);
      } catch (const Error& e) {
        fail(*gv, std::string("G: ") + e.what());
      }
    } else if (item.name == "simulation") {
      Section s(item, {"signals", "s0", "dt", "T", "planes"});
      if (const Value* v = s.get("signals")) {
        if (v->kind == Value::Kind::kList) {
          for (const Value& c : v->args) f.simulation.signals.push_back(as_signal(c));
        } else {
          f.simulation.signals.push_back(as_signal(*v));
        }
      }
      if (const Value* v = s.get("s0")) {
        const std::vector<double> s0 = as_vector(*v, "s0");
        f.simulation.s0 = Eigen::Map<const Vec>(s0.data(), static_cast<Index>(s0.size()));
      }
      if (const Value* v = s.get("dt")) {
        f.simulation.dt = as_number(*v, "dt");
        if (!(f.simulation.dt > 0.0)) fail(*v, "dt must be positive");
      }
      if (const Value* v = s.get("T")) {
        f.simulation.horizon = as_number(*v, "T");
        if (!(f.simulation.horizon > 0.0)) fail(*v, "T must be positive");
      }
      if (const Value* v = s.get("planes")) {
        const Mat pl = as_matrix(*v, "planes");
        if (pl.size() > 0 && pl.cols() != 2) fail(*v, "planes must list pairs [i j; ...]");
        for (Index r = 0; r < pl.rows(); ++r) {
          const double i = pl(r, 0), j = pl(r, 1);
          if (i < 1 || j < 1 || i != std::floor(i) || j != std::floor(j) || i == j) {
            fail(*v, "planes entries must be distinct 1-based coordinates");
          }
          f.simulation.planes.push_back(PlaneAxes{static_cast<Index>(i) - 1, static_cast<Index>(j) - 1});
        }
      }
    } else if (item.name == "options") {
      Section s(item, {"alpha_grid", "stop_tol", "max_iterations", "paper_alpha"});
      if (const Value* v = s.get("alpha_grid")) {
        f.options.alpha_grid = as_vector(*v, "alpha_grid");
        for (double a : f.options.alpha_grid) {
          if (!(a > 0.0)) fail(*v, "alpha_grid values must be positive");
        }
      }
      if (const Value* v = s.get("stop_tol")) {
        f.options.stop_tol = as_number(*v, "stop_tol");
        if (!(f.options.stop_tol > 0.0)) fail(*v, "stop_tol must be positive");
      }
      if (const Value* v = s.get("max_iterations")) {
        f.options.max_iterations = static_cast<int>(as_count(*v, "max_iterations"));
      }
      if (const Value* v = s.get("paper_alpha")) {
        f.options.paper_alpha = as_number(*v, "paper_alpha");
        if (!(*f.options.paper_alpha > 0.0)) fail(*v, "paper_alpha must be positive");
      }
    } else {
      throw ParseError("unknown item '" + item.name + "'", item.line, item.column);
    }
  }

  if (f.target) {
    const Index k = f.target->K1.rows();
    f.target->K2 = k2.value_or(Mat::Zero(k, f.reference.A2.rows()));
    f.target->K3 = k3.value_or(Mat::Zero(k, f.controller_order));
  }
  return f;
}

ProblemFile load_problem(const std::filesystem::path& path) { return parse_problem(read_file(path)); }

SynthesisProblem ProblemFile::synthesis_problem() const {
  std::string missing;
  if (!plant) missing += " plant";
  if (!target) missing += " target";
  if (!G) missing += " bound";
  if (!missing.empty()) throw InvalidInputError("synthesis needs the sections:" + missing);
  SynthesisProblem p;
  p.plant = *plant;
  p.reference = reference;
  p.a3 = controller_order;
  p.K1 = target->K1;
  p.K2 = target->K2;
  p.K3 = target->K3;
  p.G = *G;
  p.validate();
  return p;
}

DisturbedSystem ProblemFile::disturbed_system() const {
  if (!system) throw InvalidInputError("analysis needs a system section");
  if (!G) throw InvalidInputError("analysis needs a bound section");
  return DisturbedSystem(system->A, system->B, *G);
}

bool operator==(const ProblemFile& a, const ProblemFile& b) {
  if (a.system.has_value() != b.system.has_value()) return false;
  if (a.system && !(same(a.system->A, b.system->A) && same(a.system->B, b.system->B) && same(a.system->C, b.system->C)))
    return false;
  if (a.plant.has_value() != b.plant.has_value() || (a.plant && !same_plant(*a.plant, *b.plant))) return false;
  if (!same(a.reference.A2, b.reference.A2) || !same(a.reference.C2, b.reference.C2) ||
      !same(a.reference.D2, b.reference.D2))
    return false;
  if (a.controller_order != b.controller_order) return false;
  if (a.target.has_value() != b.target.has_value()) return false;
  if (a.target && !(same(a.target->K1, b.target->K1) && same(a.target->K2, b.target->K2) &&
                    same(a.target->K3, b.target->K3)))
    return false;
  if (a.G.has_value() != b.G.has_value() || (a.G && !same(a.G->matrix(), b.G->matrix()))) return false;
  const auto& sa = a.simulation;
  const auto& sb = b.simulation;
  if (sa.signals != sb.signals || sa.dt != sb.dt || sa.horizon != sb.horizon) return false;
  if (sa.s0.has_value() != sb.s0.has_value() || (sa.s0 && !same(Mat(*sa.s0), Mat(*sb.s0)))) return false;
  if (sa.planes.size() != sb.planes.size()) return false;
  for (std::size_t i = 0; i < sa.planes.size(); ++i) {
    if (sa.planes[i].first != sb.planes[i].first || sa.planes[i].second != sb.planes[i].second) return false;
  }
  return a.options.alpha_grid == b.options.alpha_grid && a.options.stop_tol == b.options.stop_tol &&
         a.options.max_iterations == b.options.max_iterations && a.options.paper_alpha == b.options.paper_alpha;
}

std::string serialize(const ProblemFile& f) {
  std::ostringstream os;
  auto key = [&os](const char* name, const std::string& value) { os << "  " << name << " = " << value << "\n"; };
  if (f.system) {
    os << "system {\n";
    key("A", format_matrix(f.system->A));
    key("B", format_matrix(f.system->B));
    key("C", format_matrix(f.system->C));
    os << "}\n";
  }
  if (f.plant) {
    os << "plant {\n";
    key("A1", format_matrix(f.plant->A1));
    key("B1", format_matrix(f.plant->B1));
    key("C1", format_matrix(f.plant->C1));
    key("D1", format_matrix(f.plant->D1));
    key("E1", format_matrix(f.plant->E1));
    key("F1", format_matrix(f.plant->F1));
    os << "}\n";
  }
  if (f.reference.a2() > 0 || f.reference.c2() > 0 || f.reference.g() > 0) {
    os << "reference {\n";
    key("A2", format_matrix(f.reference.A2));
    key("C2", format_matrix(f.reference.C2));
    key("D2", format_matrix(f.reference.D2));
    os << "}\n";
  }
  if (f.controller_order != 0 || f.plant) os << "controller_order = " << f.controller_order << "\n";
  if (f.target) {
    os << "target {\n";
    key("K1", format_matrix(f.target->K1));
    key("K2", format_matrix(f.target->K2));
    key("K3", format_matrix(f.target->K3));
    os << "}\n";
  }
  if (f.G) {
    os << "bound {\n";
    key("G", format_matrix(f.G->matrix()));
    os << "}\n";
  }
  const SimulationSection& s = f.simulation;
  os << "simulation {\n";
  if (!s.signals.empty()) {
    std::string list = "[";
    for (std::size_t i = 0; i < s.signals.size(); ++i) list += (i ? ", " : "") + format_signal(s.signals[i]);
    key("signals", list + "]");
  }
  if (s.s0) key("s0", format_matrix(s.s0->transpose()));
  key("dt", format_number(s.dt));
  key("T", format_number(s.horizon));
  if (!s.planes.empty()) {
    Mat pl(static_cast<Index>(s.planes.size()), 2);
    for (std::size_t i = 0; i < s.planes.size(); ++i) {
      pl(static_cast<Index>(i), 0) = static_cast<double>(s.planes[i].first + 1);
      pl(static_cast<Index>(i), 1) = static_cast<double>(s.planes[i].second + 1);
    }
    key("planes", format_matrix(pl));
  }
  os << "}\n";
  os << "options {\n";
  if (!f.options.alpha_grid.empty()) key("alpha_grid", format_row(f.options.alpha_grid));
  key("stop_tol", format_number(f.options.stop_tol));
  key("max_iterations", std::to_string(f.options.max_iterations));
  if (f.options.paper_alpha) key("paper_alpha", format_number(*f.options.paper_alpha));
  os << "}\n";
  return os.str();
}

ResultFile parse_result(std::string_view text) {
  const std::vector<Item> items = parse_items(text);
  reject_duplicates(items);
  ResultFile r;
  for (const Item& item : items) {
    if (item.name == "controller") {
      Section s(item, {"A3", "B3", "C3", "D3", "E3", "F3"});
      ControllerParams c;
      c.A3 = s.required("A3");
      c.B3 = s.required("B3");
      c.C3 = s.required("C3");
      c.D3 = s.required("D3");
      c.E3 = s.required("E3");
      c.F3 = s.required("F3");
      const Index a3 = c.A3.rows(), b1 = c.E3.rows(), b2 = c.E3.cols(), g = c.F3.cols();
      if (c.A3.cols() != a3 || c.B3.rows() != a3 || c.B3.cols() != b2 || c.C3.rows() != a3 || c.C3.cols() != g ||
          c.D3.rows() != b1 || c.D3.cols() != a3 || c.F3.rows() != b1) {
        throw ParseError("controller blocks have inconsistent sizes", item.line, item.column);
      }
      r.controller = std::move(c);
    } else if (item.name == "certificate") {
      Section s(item, {"P", "alpha", "margin", "output_map"});
      Certificate c;
      const Mat p = s.required("P");
      if (p.rows() != p.cols()) throw ParseError("P must be square", item.line, item.column);
      c.P = SymMat(p);
      const Mat alpha = s.required("alpha");
      const Mat margin = s.required("margin");
      if (alpha.size() != 1 || margin.size() != 1) {
        throw ParseError("alpha and margin must be numbers", item.line, item.column);
      }
      c.alpha = alpha(0, 0);
      c.margin = margin(0, 0);
      c.output_map = s.required("output_map");
      if (c.output_map.rows() != c.P.dim()) {
        throw ParseError("output_map must have as many rows as P", item.line, item.column);
      }
      r.certificate = std::move(c);
    } else if (item.name == "history") {
      Section s(item, {"trace"});
      if (const Value* v = s.get("trace")) r.trace_history = as_vector(*v, "trace");
    } else {
      throw ParseError("unknown item '" + item.name + "'", item.line, item.column);
    }
  }
  return r;
}

ResultFile load_result(const std::filesystem::path& path) { return parse_result(read_file(path)); }

bool operator==(const ResultFile& a, const ResultFile& b) {
  if (a.controller.has_value() != b.controller.has_value()) return false;
  if (a.controller && !same_controller(*a.controller, *b.controller)) return false;
  if (a.certificate.has_value() != b.certificate.has_value()) return false;
  if (a.certificate) {
    const Certificate& x = *a.certificate;
    const Certificate& y = *b.certificate;
    if (!same(x.P.matrix(), y.P.matrix()) || x.alpha != y.alpha || x.margin != y.margin ||
        !same(x.output_map, y.output_map))
      return false;
  }
  return a.trace_history == b.trace_history;
}

std::string serialize(const ResultFile& r) {
  std::ostringstream os;
  auto key = [&os](const char* name, const std::string& value) { os << "  " << name << " = " << value << "\n"; };
  if (r.controller) {
    os << "controller {\n";
    key("A3", format_matrix(r.controller->A3));
    key("B3", format_matrix(r.controller->B3));
    key("C3", format_matrix(r.controller->C3));
    key("D3", format_matrix(r.controller->D3));
    key("E3", format_matrix(r.controller->E3));
    key("F3", format_matrix(r.controller->F3));
    os << "}\n";
  }
  if (r.certificate) {
    os << "certificate {\n";
    key("P", format_matrix(r.certificate->P.matrix()));
    key("alpha", format_number(r.certificate->alpha));
    key("margin", format_number(r.certificate->margin));
    key("output_map", format_matrix(r.certificate->output_map));
    os << "}\n";
  }
  if (!r.trace_history.empty()) {
    os << "history {\n";
    key("trace", format_row(r.trace_history));
    os << "}\n";
  }
  return os.str();
}

}  // namespace acyl
