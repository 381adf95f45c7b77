#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mfotl/core.hpp"

namespace mfotl {

struct SourceSpan {
  std::string file;
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t length = 0;
};

[[nodiscard]] std::string to_string(const SourceSpan& s);

class ParseError : public std::runtime_error {
 public:
  ParseError(SourceSpan span, std::string message, std::vector<std::string> expected = {},
             std::vector<Diagnostic> diagnostics = {});

  [[nodiscard]] const SourceSpan& span() const { return span_; }
  [[nodiscard]] const std::string& message() const { return message_; }
  [[nodiscard]] const std::vector<std::string>& expected() const { return expected_; }
  [[nodiscard]] const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  SourceSpan span_;
  std::string message_;
  std::vector<std::string> expected_;
  std::vector<Diagnostic> diagnostics_;
};

[[nodiscard]] Spec parse_spec(std::string_view text, std::string file = "<input>");
[[nodiscard]] Spec load_spec(const std::string& path);

// With check = false the result is returned without validation.
[[nodiscard]] Formula parse_formula(std::string_view text, const Signature& sig, bool check = true);

}  // namespace mfotl
