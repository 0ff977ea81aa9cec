#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace orbi::cli {

enum Status : int { ok = 0, violations = 1, usage = 2 };

/// Ordered key=value records followed by a summary block.
class Report {
 public:
  void add(std::string key, std::string value);
  void summary(std::string key, std::string value);

  const std::vector<std::pair<std::string, std::string>>& records() const noexcept { return records_; }
  const std::vector<std::pair<std::string, std::string>>& summary_records() const noexcept { return summary_; }

  void write_text(std::ostream& out) const;
  /// {"records": [[key, value], ...], "summary": {...}}
  void write_json(std::ostream& out) const;

 private:
  std::vector<std::pair<std::string, std::string>> records_;
  std::vector<std::pair<std::string, std::string>> summary_;
};

/// Runs one command line (without the program name). The report goes to
/// `out`, diagnostics to `err`; the return value is the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace orbi::cli
