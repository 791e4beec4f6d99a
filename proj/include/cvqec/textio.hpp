#pragma once

// Small text helpers shared by the file formats and the CLI.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cvqec {

/// 17 significant digits, "%.17g".
std::string format_double(double v);
std::string format_list(const std::vector<double>& values);

/// Strict parse: the whole token must be consumed.
double parse_double(std::string_view token);
std::vector<double> parse_list(std::string_view text);

std::string trim(std::string_view s);
std::string strip_comment(std::string_view s);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Commits every file or none: contents go to temporaries first, then each is
/// renamed into place. Throws std::runtime_error on I/O failure.
class AtomicFileSet {
 public:
  AtomicFileSet() = default;
  AtomicFileSet(const AtomicFileSet&) = delete;
  AtomicFileSet& operator=(const AtomicFileSet&) = delete;
  ~AtomicFileSet();

  void add(const std::filesystem::path& path, std::string contents);
  void commit();

  [[nodiscard]] std::vector<std::string> paths() const;

 private:
  struct Pending {
    std::filesystem::path target;
    std::string contents;
  };
  std::vector<Pending> pending_;
  std::vector<std::filesystem::path> temporaries_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace cvqec
