#include "opdyn/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "opdyn/version.hpp"

namespace opdyn::io {

namespace {

using numlin::Complex;
using numlin::Index;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long long line_of_offset(const std::string& text, std::size_t offset) {
  long long line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

[[noreturn]] void field_error(const std::string& context,
                              const std::string& message) {
  throw ParseError(context, 0, message);
}

const json& require_field(const json& j, const char* name,
                          const std::string& context) {
  if (!j.is_object() || !j.contains(name)) {
    field_error(context, std::string("missing field '") + name + "'");
  }
  return j.at(name);
}

double require_number(const json& j, const std::string& context) {
  if (!j.is_number()) field_error(context, "expected a number");
  return j.get<double>();
}

long long require_integer(const json& j, const std::string& context) {
  if (!j.is_number_integer()) field_error(context, "expected an integer");
  return j.get<long long>();
}

std::string require_string(const json& j, const std::string& context) {
  if (!j.is_string()) field_error(context, "expected a string");
  return j.get<std::string>();
}

Complex require_complex(const json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    field_error(context, "expected a complex value as [re, im]");
  }
  Complex c{j[0].get<double>(), j[1].get<double>()};
  if (!numlin::is_finite(c)) field_error(context, "non-finite complex value");
  return c;
}

json complex_to_json(Complex c) { return json::array({c.real(), c.imag()}); }

operators::WeightRule weight_rule_from_json(const json& j,
                                            const std::string& context) {
  std::string rule = require_string(require_field(j, "rule", context),
                                    context + ".rule");
  if (rule == "paper_example_1") return operators::PaperExample1Rule{};
  if (rule == "paper_example_2") return operators::PaperExample2Rule{};
  if (rule == "constant") {
    double v = require_number(require_field(j, "value", context),
                              context + ".value");
    return operators::ConstantWeight{v};
  }
  if (rule == "table") {
    operators::WeightTable table;
    table.default_value = require_number(require_field(j, "default", context),
                                         context + ".default");
    const json& entries = require_field(j, "entries", context);
    if (!entries.is_array()) field_error(context + ".entries", "expected array");
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const json& e = entries[k];
      std::string ectx = context + ".entries[" + std::to_string(k) + "]";
      if (!e.is_array() || e.size() != 2) field_error(ectx, "expected [n, w]");
      Index n = require_integer(e[0], ectx);
      double w = require_number(e[1], ectx);
      if (!table.entries.emplace(n, w).second) {
        field_error(ectx, "duplicate index " + std::to_string(n));
      }
    }
    return table;
  }
  field_error(context + ".rule", "unknown weight rule '" + rule + "'");
}

json weight_rule_to_json(const operators::WeightRule& rule) {
  return std::visit(
      [](const auto& r) -> json {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, operators::PaperExample1Rule>) {
          return json{{"rule", "paper_example_1"}};
        } else if constexpr (std::is_same_v<T, operators::PaperExample2Rule>) {
          return json{{"rule", "paper_example_2"}};
        } else if constexpr (std::is_same_v<T, operators::ConstantWeight>) {
          return json{{"rule", "constant"}, {"value", r.value}};
        } else {
          json entries = json::array();
          for (const auto& [n, w] : r.entries) {
            entries.push_back(json::array({n, w}));
          }
          return json{{"rule", "table"},
                      {"default", r.default_value},
                      {"entries", entries}};
        }
      },
      rule);
}

operators::DiagonalRule diagonal_rule_from_json(const json& j,
                                                const std::string& context) {
  std::string type = require_string(require_field(j, "type", context),
                                    context + ".type");
  if (type == "constant") {
    return operators::ConstantDiagonal{
        require_complex(require_field(j, "value", context), context + ".value")};
  }
  if (type == "affine") {
    return operators::AffineDiagonal{
        require_complex(require_field(j, "a", context), context + ".a"),
        require_complex(require_field(j, "b", context), context + ".b")};
  }
  if (type == "table") {
    operators::DiagonalTable table;
    table.default_value = require_complex(
        require_field(j, "default", context), context + ".default");
    const json& entries = require_field(j, "entries", context);
    if (!entries.is_array()) field_error(context + ".entries", "expected array");
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const json& e = entries[k];
      std::string ectx = context + ".entries[" + std::to_string(k) + "]";
      if (!e.is_array() || e.size() != 2) {
        field_error(ectx, "expected [j, [re, im]]");
      }
      Index idx = require_integer(e[0], ectx);
      Complex val = require_complex(e[1], ectx);
      if (!table.entries.emplace(idx, val).second) {
        field_error(ectx, "duplicate index " + std::to_string(idx));
      }
    }
    return table;
  }
  field_error(context + ".type", "unknown diagonal rule '" + type + "'");
}

numlin::DenseMatrix matrix_from_json(const json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) {
    field_error(context, "expected a nonempty array of rows");
  }
  std::vector<std::vector<Complex>> rows;
  rows.reserve(j.size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    std::string rctx = context + "[" + std::to_string(r) + "]";
    if (!row.is_array() || row.empty()) field_error(rctx, "expected a row array");
    std::vector<Complex> out_row;
    out_row.reserve(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      out_row.push_back(
          require_complex(row[c], rctx + "[" + std::to_string(c) + "]"));
    }
    rows.push_back(std::move(out_row));
  }
  try {
    return numlin::DenseMatrix::from_rows(rows);
  } catch (const std::invalid_argument& e) {
    field_error(context, e.what());
  }
}

operators::OperatorDescription block_diagonal_from_json(
    const json& j, const std::string& context) {
  if (j.contains("builtin")) {
    std::string name = require_string(j.at("builtin"), context + ".builtin");
    if (name == "nest") {
      long long blocks = require_integer(require_field(j, "blocks", context),
                                         context + ".blocks");
      bool transposed = j.value("transposed", false);
      if (blocks <= 0) field_error(context + ".blocks", "must be positive");
      return constructions::nest_block_operator(static_cast<int>(blocks),
                                                transposed)
          .op;
    }
    if (name == "ik_epsilon") {
      double epsilon = require_number(require_field(j, "epsilon", context),
                                      context + ".epsilon");
      std::string c_rule = require_string(
          require_field(j, "c_rule", context), context + ".c_rule");
      long long blocks = require_integer(require_field(j, "blocks", context),
                                         context + ".blocks");
      long long zeroed = 0;
      if (j.contains("zeroed_blocks")) {
        zeroed = require_integer(j.at("zeroed_blocks"),
                                 context + ".zeroed_blocks");
      }
      if (blocks <= 0) field_error(context + ".blocks", "must be positive");
      try {
        auto built = constructions::build_ik_epsilon(
            epsilon, parse_c_rule(c_rule), static_cast<int>(blocks), c_rule);
        if (zeroed == 0) return built.op;
        return constructions::ik_epsilon_truncated_perturbation(
            built.params, static_cast<int>(zeroed));
      } catch (const std::invalid_argument& e) {
        field_error(context, e.what());
      }
    }
    field_error(context + ".builtin", "unknown builtin '" + name + "'");
  }

  Index offset = require_integer(require_field(j, "offset", context),
                                 context + ".offset");
  const json& blocks = require_field(j, "blocks", context);
  if (!blocks.is_array() || blocks.empty()) {
    field_error(context + ".blocks", "expected a nonempty array");
  }
  std::vector<operators::Block> materialized;
  std::vector<Index> sizes;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const json& b = blocks[k];
    std::string bctx = context + ".blocks[" + std::to_string(k) + "]";
    if (b.contains("matrix")) {
      numlin::DenseMatrix m = matrix_from_json(b.at("matrix"), bctx + ".matrix");
      if (!m.square()) field_error(bctx + ".matrix", "blocks must be square");
      sizes.push_back(static_cast<Index>(m.rows()));
      materialized.emplace_back(std::move(m));
    } else if (b.contains("bidiagonal")) {
      const json& u = b.at("bidiagonal");
      std::string uctx = bctx + ".bidiagonal";
      operators::UniformBidiagonal ub;
      ub.diag = require_number(require_field(u, "diag", uctx), uctx + ".diag");
      ub.super = require_number(require_field(u, "super", uctx), uctx + ".super");
      ub.size = require_integer(require_field(u, "size", uctx), uctx + ".size");
      ub.lower = u.value("lower", false);
      if (ub.size <= 0) field_error(uctx + ".size", "must be positive");
      sizes.push_back(ub.size);
      materialized.emplace_back(ub);
    } else {
      field_error(bctx, "expected 'matrix' or 'bidiagonal'");
    }
  }
  auto gen = [materialized](int k) -> operators::Block {
    return materialized[static_cast<std::size_t>(k)];
  };
  return operators::BlockDiagonal{
      std::make_shared<operators::BlockGenerator>(gen, offset, sizes)};
}

}  // namespace

SparseVector read_vector_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::vector<SparseVector::Entry> entries;
  std::map<Index, long long> seen;  // index -> first line
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    Index index;
    double re, im;
    if (!(ss >> index >> re >> im)) {
      throw ParseError(path.string(), line_no,
                       "expected 'index re im', got '" + line + "'");
    }
    std::string tail;
    if (ss >> tail) {
      throw ParseError(path.string(), line_no, "trailing content '" + tail + "'");
    }
    auto [it, inserted] = seen.emplace(index, line_no);
    if (!inserted) {
      throw ParseError(path.string(), line_no,
                       "duplicate index " + std::to_string(index) +
                           " (first at line " + std::to_string(it->second) + ")");
    }
    Complex c{re, im};
    if (!numlin::is_finite(c)) {
      throw ParseError(path.string(), line_no, "non-finite value");
    }
    entries.emplace_back(index, c);
  }
  return SparseVector::from_entries(std::move(entries));
}

void write_vector_file(const std::filesystem::path& path,
                       const SparseVector& v) {
  std::string out = "# index re im\n";
  for (const auto& [i, c] : v.entries()) {
    out += std::to_string(i) + " " + format_double(c.real()) + " " +
           format_double(c.imag()) + "\n";
  }
  atomic_write_text(path, out);
}

operators::OperatorDescription operator_from_json(const json& doc,
                                                  const std::string& context) {
  std::string kind =
      require_string(require_field(doc, "kind", context), context + ".kind");
  if (kind == "bilateral_shift") {
    return operators::BilateralShift{weight_rule_from_json(
        require_field(doc, "weights", context), context + ".weights")};
  }
  if (kind == "unilateral_shift") {
    operators::UnilateralShift op;
    op.weights = weight_rule_from_json(require_field(doc, "weights", context),
                                       context + ".weights");
    std::string dir = require_string(require_field(doc, "direction", context),
                                     context + ".direction");
    if (dir == "forward") {
      op.direction = operators::ShiftDirection::forward;
    } else if (dir == "backward") {
      op.direction = operators::ShiftDirection::backward;
    } else {
      field_error(context + ".direction", "expected 'forward' or 'backward'");
    }
    return op;
  }
  if (kind == "diagonal") {
    return operators::Diagonal{diagonal_rule_from_json(
        require_field(doc, "rule", context), context + ".rule")};
  }
  if (kind == "finite") {
    numlin::DenseMatrix m =
        matrix_from_json(require_field(doc, "matrix", context),
                         context + ".matrix");
    if (!m.square()) field_error(context + ".matrix", "must be square");
    return operators::Finite{std::move(m)};
  }
  if (kind == "jordan") {
    Complex mu = require_complex(require_field(doc, "mu", context),
                                 context + ".mu");
    long long n = require_integer(require_field(doc, "n", context),
                                  context + ".n");
    if (n <= 0) field_error(context + ".n", "must be positive");
    return operators::Jordan{mu, n};
  }
  if (kind == "block_diagonal") {
    return block_diagonal_from_json(doc, context);
  }
  field_error(context + ".kind", "unknown operator kind '" + kind + "'");
}

operators::OperatorDescription load_operator(
    const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string(), line_of_offset(text, e.byte), e.what());
  }
  try {
    return operator_from_json(doc, "$");
  } catch (const ParseError& e) {
    throw ParseError(path.string() + " " + e.file(), e.line(), e.what());
  }
}

json nest_spec_json(int block_count, bool transposed) {
  return json{{"kind", "block_diagonal"},
              {"builtin", "nest"},
              {"blocks", block_count},
              {"transposed", transposed}};
}

json ik_epsilon_spec_json(double epsilon, const std::string& c_rule,
                          int block_count, int zeroed_blocks) {
  json j{{"kind", "block_diagonal"},
         {"builtin", "ik_epsilon"},
         {"epsilon", epsilon},
         {"c_rule", c_rule},
         {"blocks", block_count}};
  if (zeroed_blocks > 0) j["zeroed_blocks"] = zeroed_blocks;
  return j;
}

json bilateral_shift_spec_json(const operators::WeightRule& rule) {
  return json{{"kind", "bilateral_shift"}, {"weights", weight_rule_to_json(rule)}};
}

json jordan_spec_json(numlin::Complex mu, numlin::Index n) {
  return json{{"kind", "jordan"}, {"mu", complex_to_json(mu)}, {"n", n}};
}

std::function<double(int)> parse_c_rule(const std::string& rule) {
  if (rule == "linear") {
    return [](int i) { return static_cast<double>(i); };
  }
  if (rule == "sqrt") {
    return [](int i) { return std::sqrt(static_cast<double>(i)); };
  }
  if (rule.starts_with("table:")) {
    std::filesystem::path path = rule.substr(6);
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open C-rule table");
    auto table = std::make_shared<std::map<int, double>>();
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::size_t first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      std::istringstream ss(line);
      int i;
      double c;
      if (!(ss >> i >> c)) {
        throw ParseError(path.string(), line_no, "expected 'i C'");
      }
      (*table)[i] = c;
    }
    std::string name = path.string();
    return [table, name](int i) {
      auto it = table->find(i);
      if (it == table->end()) {
        throw std::invalid_argument("C-rule table " + name +
                                    " has no entry for i = " + std::to_string(i));
      }
      return it->second;
    };
  }
  throw ParseError(rule, 0, "unknown C-rule (expected linear|sqrt|table:<file>)");
}

json manifest_json(const constructions::IkEpsilonParams& params,
                   const std::vector<std::string>& witness_files,
                   const std::string& spec_file) {
  json blocks = json::array();
  for (std::size_t k = 0; k < params.blocks.size(); ++k) {
    const auto& b = params.blocks[k];
    json jb{{"i", b.i},      {"eps", b.eps},      {"L", b.L},
            {"m", b.m},      {"n", b.n},          {"C", b.C},
            {"offset", b.offset}};
    if (k < witness_files.size()) jb["witness"] = witness_files[k];
    blocks.push_back(jb);
  }
  return json{{"tool", std::string(kToolName) + " " + std::string(kToolVersion)},
              {"operator", "ik_epsilon"},
              {"epsilon", params.epsilon},
              {"c_rule", params.c_rule_name},
              {"block_count", params.blocks.size()},
              {"spec_file", spec_file},
              {"blocks", blocks}};
}

json report_json(const criteria::CertificateReport& report, const json& config) {
  json parameters = json::object();
  for (const auto& [name, value] : report.parameters) parameters[name] = value;

  json violations = json::array();
  for (const auto& v : report.violations) {
    violations.push_back(json{{"m", v.m},
                              {"i", v.i},
                              {"required", v.required},
                              {"achieved", v.achieved},
                              {"what", v.what}});
  }
  json margins = json::array();
  for (const auto& g : report.margins) {
    margins.push_back(json{{"m", g.m},
                           {"i", g.i},
                           {"required", g.required},
                           {"achieved", g.achieved}});
  }
  json decay = json::array();
  for (const auto& d : report.decay) {
    decay.push_back(json{{"m", d.m},
                         {"mode", criteria::to_string(d.mode)},
                         {"step", d.step},
                         {"ratio", d.ratio},
                         {"radius", d.radius},
                         {"ok", d.ok}});
  }
  json witnesses = json::array();
  for (const auto& w : report.witnesses) {
    witnesses.push_back(json{{"m", w.m},
                             {"growth_ok", w.growth_ok},
                             {"decay_ok", w.decay_ok},
                             {"fraction", w.fraction},
                             {"fraction_target", w.fraction_target}});
  }
  return json{{"tool_version",
               std::string(kToolName) + " " + std::string(kToolVersion)},
              {"verdict", report.pass ? "pass" : "fail"},
              {"parameters", parameters},
              {"scope_note", report.scope_note},
              {"violations", violations},
              {"margins", margins},
              {"decay", decay},
              {"witnesses", witnesses},
              {"config", config}};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string orbit_csv(const std::vector<double>& norms) {
  std::string out = "i,norm\n";
  for (std::size_t i = 0; i < norms.size(); ++i) {
    out += std::to_string(i) + "," + format_double(norms[i]) + "\n";
  }
  return out;
}

std::string distfn_csv(const dynamics::DistributionProfile& profile) {
  std::string out = "n,tau,F\n";
  for (std::size_t k = 0; k < profile.n_schedule.size(); ++k) {
    for (std::size_t t = 0; t < profile.tau_grid.size(); ++t) {
      out += std::to_string(profile.n_schedule[k]) + "," +
             format_double(profile.tau_grid[t]) + "," +
             format_double(profile.F_values[k][t]) + "\n";
    }
  }
  return out;
}

std::string rates_csv(const std::vector<double>& rates) {
  std::string out = "n,rate\n";
  for (std::size_t i = 0; i < rates.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_double(rates[i]) + "\n";
  }
  return out;
}

void atomic_write_text(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::path dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write to " + tmp.string());
    }
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace opdyn::io
