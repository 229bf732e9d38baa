#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "opdyn/constructions.hpp"
#include "opdyn/criteria.hpp"
#include "opdyn/dynamics.hpp"
#include "opdyn/numlin.hpp"
#include "opdyn/operators.hpp"

namespace opdyn::io {

using json = nlohmann::ordered_json;
using numlin::SparseVector;

/// Input error with file/line/field context; surfaces as CLI exit code 2.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, long long line, const std::string& message)
      : std::runtime_error(file + (line > 0 ? ":" + std::to_string(line) : "") +
                           ": " + message),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  long long line() const { return line_; }

 private:
  std::string file_;
  long long line_ = 0;
};

// ---------------------------------------------------------------------------
// Vector files: one `index re im` triple per line, `#` comments and blank
// lines ignored, duplicate indices rejected.

SparseVector read_vector_file(const std::filesystem::path& path);
void write_vector_file(const std::filesystem::path& path,
                       const SparseVector& v);

// ---------------------------------------------------------------------------
// Operator spec files (JSON with a `kind` discriminator).

/// Parses and validates an operator spec document. Field errors carry the
/// JSON pointer path; syntax errors carry the byte offset.
operators::OperatorDescription load_operator(const std::filesystem::path& path);
operators::OperatorDescription operator_from_json(const json& doc,
                                                  const std::string& context);

/// Canonical spec documents for the shipped constructions.
json nest_spec_json(int block_count, bool transposed);
json ik_epsilon_spec_json(double epsilon, const std::string& c_rule,
                          int block_count, int zeroed_blocks = 0);
json bilateral_shift_spec_json(const operators::WeightRule& rule);
json jordan_spec_json(numlin::Complex mu, numlin::Index n);

/// Named C-rules for I + K_epsilon: "linear" (C_i = i), "sqrt" (C_i = sqrt(i)),
/// or "table:<file>" with `i C` lines.
std::function<double(int)> parse_c_rule(const std::string& rule);

json manifest_json(const constructions::IkEpsilonParams& params,
                   const std::vector<std::string>& witness_files,
                   const std::string& spec_file);

json report_json(const criteria::CertificateReport& report, const json& config);

// ---------------------------------------------------------------------------
// CSV emission (floats fixed at 17 significant digits).

std::string format_double(double v);
std::string orbit_csv(const std::vector<double>& norms);
std::string distfn_csv(const dynamics::DistributionProfile& profile);
std::string rates_csv(const std::vector<double>& rates);

// ---------------------------------------------------------------------------
// Atomic file output (temp file + rename).

void atomic_write_text(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace opdyn::io
